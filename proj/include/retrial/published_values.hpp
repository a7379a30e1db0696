#pragma once

#include <array>
#include <vector>

namespace retrial::published {

// Reference values for lambda = 1, mu = 5, theta = 2. Fixed-point tables
// are printed with 4 decimals; eta* with 5.

inline constexpr double kLambda = 1.0;
inline constexpr double kMu = 5.0;
inline constexpr double kTheta = 2.0;

inline constexpr double kTableTol = 5e-5;
inline constexpr double kEtaTol = 5e-6;

struct EtaRow {
  int d1;
  std::array<double, 9> eta;  // rho = 0.1, 0.2, ..., 0.9
};

inline const std::array<EtaRow, 5> kEtaGrid{{
    {3, {0.92169, 0.86883, 0.82905, 0.79728, 0.77091, 0.74844, 0.72890,
         0.71165, 0.69624}},
    {5, {0.93031, 0.88896, 0.85937, 0.83633, 0.81747, 0.80151, 0.78770,
         0.77554, 0.76468}},
    {10, {0.94387, 0.91643, 0.89785, 0.88375, 0.87236, 0.86281, 0.85457,
          0.84734, 0.84089}},
    {20, {0.95779, 0.94088, 0.92989, 0.92169, 0.91513, 0.90967, 0.90497,
          0.90086, 0.89719}},
    {50, {0.97366, 0.96547, 0.96033, 0.95656, 0.95357, 0.95109, 0.94897,
          0.94711, 0.94547}},
}};

/// One printed row: pi_W[k] and pi_I[k] for k = 0 .. w.size() - 1.
struct FixedPointRow {
  int d1;
  int d2;
  std::vector<double> w;
  std::vector<double> i;
};

inline const std::vector<FixedPointRow> kTable1{
    {2, 1, {0.1459, 0.0043, 0}, {0.8541, 0.0106, 0}},
    {5, 1, {0.1110, 0, 0}, {0.8890, 0, 0}},
    {10, 1, {0.0836, 0, 0}, {0.9164, 0, 0}},
};

inline const std::vector<FixedPointRow> kTable2{
    {1, 2,
     {0.1667, 0.0911, 0.0484, 0.0276, 0.0173, 0.0118, 0.0086},
     {0.8333, 0.2887, 0.1509, 0.0898, 0.0588, 0.0416, 0.0313}},
    {1, 5,
     {0.1667, 0.1550, 0.1354, 0.1208, 0.1106, 0.1034, 0.0980},
     {0.8333, 0.6084, 0.5220, 0.4685, 0.4323, 0.4062, 0.3864}},
    {1, 8,
     {0.1667, 0.1799, 0.1717, 0.1626, 0.1554, 0.1499, 0.1456},
     {0.8333, 0.7330, 0.6786, 0.6413, 0.6145, 0.5942, 0.5782}},
    {1, 10,
     {0.1667, 0.1893, 0.1853, 0.1783, 0.1724, 0.1677, 0.1640},
     {0.8333, 0.7800, 0.7371, 0.7063, 0.6836, 0.6663, 0.6524}},
    {1, 15,
     {0.1667, 0.2028, 0.2045, 0.2006, 0.1965, 0.1932, 0.1905},
     {0.8333, 0.8473, 0.8197, 0.7983, 0.7821, 0.7695, 0.7594}},
    {1, 20,
     {0.1667, 0.2100, 0.2146, 0.2122, 0.2093, 0.2067, 0.2046},
     {0.8333, 0.8832, 0.8630, 0.8466, 0.8340, 0.8242, 0.8162}},
};

inline const std::vector<FixedPointRow> kTable3{
    {5, 5,
     {0.1110, 0, 0, 0, 0, 0, 0},
     {0.8890, 0.0967, 0, 0, 0, 0, 0}},
    {5, 10,
     {0.1110, 0.0006, 0, 0, 0, 0, 0},
     {0.8890, 0.3109, 0.0210, 0, 0, 0, 0}},
    {5, 15,
     {0.1110, 0.0041, 0, 0, 0, 0, 0},
     {0.8890, 0.4589, 0.1456, 0.0209, 0.0008, 0, 0}},
    {5, 20,
     {0.1110, 0.0108, 0.0005, 0, 0, 0, 0},
     {0.8890, 0.5576, 0.3007, 0.1361, 0.0498, 0.0140, 0.0029}},
    {5, 25,
     {0.1110, 0.0193, 0.0029, 0.0004, 0.0001, 0, 0},
     {0.8890, 0.6267, 0.4297, 0.2899, 0.1934, 0.1278, 0.0839}},
    {5, 30,
     {0.1110, 0.0285, 0.0082, 0.0027, 0.0010, 0.0004, 0.0002},
     {0.8890, 0.6774, 0.5278, 0.4230, 0.3483, 0.2941, 0.2539}},
};

/// Published joint-monotone thresholds K_{d1,d2} that agree with the
/// printed tables. (1, 10) is listed as 5 but the table gives 1.
struct ThresholdClaim {
  int d1;
  int d2;
  int k;
};

inline const std::vector<ThresholdClaim> kThresholds{
    {1, 2, 0}, {1, 5, 0}, {1, 8, 1}, {5, 5, 0}, {5, 10, 0},
    {5, 15, 0}, {5, 20, 0}, {5, 25, 0}, {5, 30, 0},
};

}  // namespace retrial::published
