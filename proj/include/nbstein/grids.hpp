#pragma once

// Built-in parameter grids. Any change to a value here bumps kGridVersion,
// which every report echoes.

#include <array>
#include <string_view>

namespace nbstein::grids {

inline constexpr std::string_view kGridVersion = "grids-v1";

inline constexpr std::array<double, 6> kR = {0.4, 0.6, 1.0, 2.0, 5.0, 20.0};
inline constexpr std::array<double, 9> kP = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct BT {
  double b;
  double t;
};
/// Single-ancestor law: subcritical, pure death, critical and supercritical.
inline constexpr std::array<BT, 8> kLemma21 = {{
    {0.0, 1.0}, {0.5, 0.5}, {0.5, 2.0}, {0.9, 1.0},
    {1.0, 0.5}, {1.0, 2.0}, {1.5, 0.5}, {1.5, 1.0},
}};

struct ABT {
  double a;
  double b;
  double t;
};
inline constexpr std::array<ABT, 6> kLemma22 = {{
    {0.5, 0.3, 1.0}, {2.0, 0.3, 3.0}, {1.0, 0.5, 2.0},
    {2.0, 0.8, 1.0}, {0.5, 0.8, 4.0}, {1.0, 0.9, 2.0},
}};
/// Long-horizon run compared with NB(a/b, b); t is 40 relaxation times.
inline constexpr ABT kLemma22Stationary = {1.0, 0.3, 50.0 / 0.7};

struct Coupling {
  int i;
  double a;
  double b;
  double t;
};
inline constexpr std::array<Coupling, 4> kCoupling = {{
    {1, 1.0, 0.5, 1.0}, {3, 1.0, 0.5, 1.0}, {1, 0.5, 0.8, 2.0}, {3, 0.5, 0.8, 2.0},
}};

inline constexpr std::array<double, 9> kThetaT = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

/// Poisson-limit check of the component bounds: p → 0 with rp = λ.
inline constexpr double kPoissonP = 1e-6;
inline constexpr std::array<double, 4> kPoissonLambda = {0.5, 1.0, 4.0, 20.0};

}  // namespace nbstein::grids
