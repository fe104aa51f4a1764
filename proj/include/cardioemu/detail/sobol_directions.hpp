// Primitive polynomials and initial direction numbers for the Sobol'
// sequence, dimensions 2..160 (dimension 1 is the van der Corput
// sequence and needs no table entry). Data from the published
// Joe & Kuo "new-joe-kuo-6" table.

#pragma once

#include <cstdint>

namespace cardioemu::detail {

inline constexpr int kSobolTableDims = 160;

// Polynomial for dimension d (2-based) at index d-2, encoded with all
// coefficient bits including the leading and trailing one.
inline constexpr std::uint32_t kSobolPoly[] = {
    3, 7, 11, 13, 19, 25, 37, 41, 47, 55, 59, 61,
    67, 91, 97, 103, 109, 115, 131, 137, 143, 145, 157, 167,
    171, 185, 191, 193, 203, 211, 213, 229, 239, 241, 247, 253,
    285, 299, 301, 333, 351, 355, 357, 361, 369, 391, 397, 425,
    451, 463, 487, 501, 529, 539, 545, 557, 563, 601, 607, 617,
    623, 631, 637, 647, 661, 675, 677, 687, 695, 701, 719, 721,
    731, 757, 761, 787, 789, 799, 803, 817, 827, 847, 859, 865,
    875, 877, 883, 895, 901, 911, 949, 953, 967, 971, 973, 981,
    985, 995, 1001, 1019, 1033, 1051, 1063, 1069, 1125, 1135, 1153, 1163,
    1221, 1239, 1255, 1267, 1279, 1293, 1305, 1315, 1329, 1341, 1347, 1367,
    1387, 1413, 1423, 1431, 1441, 1479, 1509, 1527, 1531, 1555, 1557, 1573,
    1591, 1603, 1615, 1627, 1657, 1663, 1673, 1717, 1729, 1747, 1759, 1789,
    1815, 1821, 1825, 1849, 1863, 1869, 1877, 1881, 1891, 1917, 1933, 1939,
    1969, 2011, 2035,
};

// Initial direction integers m_1..m_s per dimension, s = degree of the
// polynomial; rows are zero padded to the table width.
inline constexpr int kSobolMaxDegree = 18;
inline constexpr std::uint32_t kSobolMinit[][18] = {
    {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 13, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 17, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 11, 19, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 3, 11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 5, 31, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 9, 7, 49, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 15, 21, 21, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 13, 27, 49, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 15, 7, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 13, 25, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 19, 61, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 11, 23, 15, 103, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 13, 13, 15, 69, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 13, 7, 35, 63, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 9, 1, 25, 53, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 13, 9, 35, 107, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 5, 27, 61, 31, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 11, 19, 41, 61, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 3, 3, 13, 69, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 13, 1, 19, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 5, 13, 19, 59, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 9, 25, 29, 41, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 13, 23, 1, 55, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 3, 13, 59, 17, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 3, 5, 53, 69, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 23, 33, 13, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 7, 1, 61, 123, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 9, 13, 61, 49, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 5, 3, 55, 33, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 31, 13, 49, 245, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 15, 31, 59, 63, 97, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 11, 11, 11, 77, 249, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 11, 27, 43, 71, 9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 15, 21, 11, 81, 45, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 3, 25, 31, 65, 79, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 1, 19, 11, 3, 205, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 9, 19, 21, 29, 157, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 11, 1, 33, 89, 185, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 3, 15, 9, 79, 71, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 11, 15, 39, 119, 27, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 1, 11, 31, 97, 225, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 3, 23, 43, 57, 177, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 17, 17, 37, 71, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 5, 27, 63, 123, 213, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 5, 11, 43, 53, 133, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 5, 29, 17, 47, 173, 479, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 11, 3, 1, 109, 9, 69, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 5, 17, 39, 23, 5, 343, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 5, 25, 15, 31, 103, 499, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 11, 11, 17, 63, 105, 183, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 11, 9, 29, 97, 231, 363, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 15, 19, 45, 41, 7, 383, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 31, 19, 83, 137, 221, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 3, 23, 15, 111, 223, 83, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 13, 31, 15, 55, 25, 161, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 13, 25, 47, 39, 87, 257, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 11, 21, 53, 125, 249, 293, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 11, 11, 7, 57, 79, 323, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 17, 13, 81, 3, 131, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 13, 23, 7, 65, 251, 475, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 1, 9, 43, 3, 149, 11, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 13, 31, 13, 13, 255, 487, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 1, 5, 63, 89, 91, 127, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 3, 1, 19, 123, 127, 237, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 7, 23, 31, 37, 243, 289, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 11, 17, 53, 117, 183, 491, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 5, 1, 13, 13, 209, 345, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 15, 1, 57, 115, 7, 33, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 11, 7, 43, 81, 207, 175, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 1, 15, 27, 63, 255, 49, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 3, 27, 61, 105, 171, 305, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 3, 1, 3, 57, 249, 149, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 5, 5, 57, 15, 13, 159, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 11, 7, 11, 105, 141, 225, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 5, 27, 59, 121, 101, 271, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 9, 11, 49, 51, 59, 115, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 1, 23, 45, 125, 71, 419, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 5, 23, 5, 105, 109, 75, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 15, 7, 11, 67, 121, 453, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 3, 9, 13, 31, 27, 449, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 19, 39, 39, 89, 15, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 1, 1, 33, 73, 145, 379, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 15, 43, 29, 13, 483, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 3, 19, 27, 85, 131, 431, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 3, 5, 35, 23, 195, 349, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 7, 9, 27, 39, 59, 297, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 9, 11, 17, 13, 241, 157, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 15, 25, 57, 33, 189, 213, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 1, 9, 55, 73, 83, 217, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 13, 19, 27, 23, 113, 249, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 3, 23, 43, 3, 253, 479, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 11, 5, 45, 117, 217, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 7, 29, 37, 33, 123, 147, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 5, 5, 37, 227, 223, 459, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 5, 5, 39, 63, 255, 135, 487, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 7, 9, 7, 87, 249, 217, 599, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 13, 9, 47, 7, 225, 363, 247, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 13, 19, 13, 9, 67, 9, 737, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 5, 19, 59, 7, 41, 319, 677, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 3, 31, 63, 15, 43, 207, 789, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 9, 13, 39, 3, 47, 497, 169, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 7, 21, 17, 97, 19, 415, 905, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 1, 3, 31, 71, 111, 165, 127, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 11, 1, 61, 83, 119, 203, 847, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 13, 9, 61, 19, 97, 47, 35, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 7, 15, 29, 63, 95, 417, 469, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 9, 25, 9, 71, 57, 213, 385, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 13, 31, 47, 101, 57, 39, 341, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 3, 31, 57, 125, 173, 365, 551, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 1, 13, 57, 67, 157, 451, 707, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 7, 21, 13, 105, 89, 429, 965, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 9, 17, 51, 45, 119, 157, 141, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 13, 45, 91, 9, 129, 741, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 1, 23, 57, 67, 141, 151, 571, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 11, 17, 47, 93, 107, 375, 157, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 5, 11, 21, 43, 51, 169, 915, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 3, 15, 55, 101, 67, 455, 625, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 9, 1, 23, 29, 47, 345, 595, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 5, 49, 29, 155, 323, 589, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 7, 5, 41, 127, 61, 261, 717, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 17, 23, 117, 67, 129, 1009, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 13, 11, 39, 21, 207, 123, 305, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 9, 29, 3, 95, 47, 231, 73, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 9, 1, 29, 117, 21, 441, 259, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 13, 21, 39, 125, 211, 439, 723, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 3, 17, 63, 115, 89, 49, 773, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 13, 11, 33, 101, 107, 63, 73, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 5, 13, 57, 63, 135, 437, 177, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 7, 27, 63, 93, 47, 417, 483, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 1, 23, 29, 1, 191, 49, 23, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 15, 25, 55, 9, 101, 219, 607, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 7, 7, 19, 51, 251, 393, 307, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 3, 25, 55, 17, 75, 337, 3, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 13, 25, 17, 65, 45, 479, 413, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 7, 27, 49, 99, 161, 213, 727, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 1, 23, 5, 43, 41, 251, 857, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 7, 11, 61, 39, 87, 383, 835, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 15, 13, 7, 29, 7, 505, 923, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 1, 5, 31, 47, 157, 445, 501, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 7, 1, 43, 9, 147, 115, 605, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 13, 5, 1, 119, 211, 455, 1001, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 3, 5, 13, 19, 3, 243, 75, 843, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 7, 7, 1, 19, 91, 249, 357, 589, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 1, 9, 1, 25, 109, 197, 279, 411, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 15, 23, 57, 59, 135, 191, 75, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 5, 15, 29, 21, 39, 253, 383, 349, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 5, 19, 45, 61, 151, 199, 981, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 13, 9, 61, 107, 141, 141, 1, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 1, 11, 27, 25, 85, 105, 309, 979, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 3, 11, 19, 7, 115, 223, 349, 43, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 9, 21, 39, 123, 21, 275, 927, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 1, 7, 13, 15, 41, 47, 243, 303, 437, 0, 0, 0, 0, 0, 0, 0, 0},
};

}  // namespace cardioemu::detail
