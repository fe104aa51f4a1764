#include "cardioemu/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cardioemu/errors.hpp"
#include "cardioemu/numio.hpp"

namespace cardioemu {

using nlohmann::json;

void TrainingSample::validate(const ParameterSpace& space, int n_traces) const {
  space.check_within_bounds(theta);
  if (initial_state.size() != n_traces) {
    throw DatasetError("sample: initial state must provide the " + std::to_string(n_traces) +
                       " physical values");
  }
  if (target.n_states() != n_traces) {
    throw DatasetError("sample: target trajectory must carry the physical traces");
  }
  if (target.rows() < 2) throw DatasetError("sample: target trajectory too short");
  if (std::abs(target.times[0]) > 1e-12 ||
      std::abs(target.times[target.rows() - 1] - t_hb) > 1e-9 * t_hb) {
    throw DatasetError("sample: target grid must cover exactly [0, t_hb]");
  }
  if ((target.states.row(0).transpose() - initial_state).cwiseAbs().maxCoeff() > 1e-12) {
    throw DatasetError("sample: initial state must equal trajectory row 0");
  }
}

namespace {

json space_to_json(const ParameterSpace& space) {
  json arr = json::array();
  for (const auto& e : space.entries()) {
    arr.push_back({{"name", e.name}, {"unit", e.unit}, {"lower", e.lower}, {"upper", e.upper}});
  }
  return arr;
}

ParameterSpace space_from_json(const json& arr) {
  std::vector<ParameterEntry> entries;
  for (const auto& e : arr) {
    entries.push_back({e.at("name").get<std::string>(), e.value("unit", ""),
                       e.at("lower").get<double>(), e.at("upper").get<double>()});
  }
  return ParameterSpace(std::move(entries));
}

std::string sample_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%05zu.csv", index);
  return buf;
}

}  // namespace

void Dataset::validate() const {
  for (const auto& s : samples) s.validate(space, n_traces());
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  dataset.validate();
  std::filesystem::create_directories(dir / "samples");
  json manifest;
  manifest["space"] = space_to_json(dataset.space);
  manifest["seed"] = dataset.seed;
  manifest["generator"] = dataset.generator;
  manifest["sample_count"] = dataset.samples.size();
  json samples = json::array();
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const TrainingSample& s = dataset.samples[i];
    json theta = json::array();
    for (Eigen::Index j = 0; j < s.theta.size(); ++j) theta.push_back(format_full(s.theta[j]));
    json entry = {{"file", "samples/" + sample_file_name(i)},
                  {"theta", theta},
                  {"t_hb", format_full(s.t_hb)},
                  {"av_delay", format_full(s.av_delay)}};
    if (!s.warnings.empty()) entry["warnings"] = s.warnings;
    samples.push_back(entry);
    write_trajectory_csv(dir / "samples" / sample_file_name(i), s.target, dataset.trace_labels);
  }
  manifest["samples"] = samples;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DatasetError("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DatasetError("no manifest.json in '" + dir.string() + "'");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DatasetError("bad manifest in '" + dir.string() + "': " + e.what());
  }

  Dataset dataset;
  dataset.space = space_from_json(manifest.at("space"));
  dataset.seed = manifest.value("seed", 0ull);
  dataset.generator = manifest.value("generator", "");
  bool first = true;
  for (const auto& entry : manifest.at("samples")) {
    TrainingSample s;
    const auto theta = entry.at("theta");
    s.theta.resize(static_cast<Eigen::Index>(theta.size()));
    for (std::size_t j = 0; j < theta.size(); ++j) {
      s.theta[static_cast<Eigen::Index>(j)] =
          theta[j].is_string() ? parse_double(theta[j].get<std::string>()) : theta[j].get<double>();
    }
    const auto num = [](const json& v) {
      return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
    };
    s.t_hb = num(entry.at("t_hb"));
    s.av_delay = num(entry.at("av_delay"));
    if (entry.contains("warnings")) {
      s.warnings = entry.at("warnings").get<std::vector<std::string>>();
    }
    std::vector<std::string> labels;
    s.target = read_trajectory_csv(dir / entry.at("file").get<std::string>(), &labels);
    if (first) {
      dataset.trace_labels = labels;
      first = false;
    } else if (labels != dataset.trace_labels) {
      throw DatasetError("sample trace labels differ across the dataset");
    }
    s.initial_state = s.target.states.row(0).transpose();
    s.validate(dataset.space, dataset.n_traces());
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

std::pair<std::vector<int>, std::vector<int>> split_head_tail(std::size_t n, std::size_t n_tail) {
  if (n_tail > n) throw ConfigError("split: tail larger than dataset");
  std::vector<int> head, tail;
  for (std::size_t i = 0; i + n_tail < n; ++i) head.push_back(static_cast<int>(i));
  for (std::size_t i = n - n_tail; i < n; ++i) tail.push_back(static_cast<int>(i));
  return {head, tail};
}

}  // namespace cardioemu
