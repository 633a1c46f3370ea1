#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "imn/dataset.hpp"

namespace imn {

// Two interleaving noisy semicircles, n/2 points per class. Not linearly
// separable at moderate noise.
Dataset gen_half_moons(int n, double noise_std, std::uint64_t seed);

enum class XaiKind { kLinear, kNonlinearAdditive, kPiecewise };

std::string xai_kind_name(XaiKind kind);
XaiKind xai_kind_from_name(const std::string& name);

struct XaiDatasetSpec {
  XaiKind kind = XaiKind::kLinear;
  int m = 5;
  int n = 500;
  double rho = 0.0;  // pairwise feature correlation
  std::uint64_t seed = 0;
  int shapley_m_max = 15;

  void validate() const;
};

// Synthetic binary-classification data with per-instance ground-truth
// attributions of the generative score. Features are equicorrelated unit
// Gaussians; the label thresholds a kind-specific score at 0.
struct XaiData {
  Dataset data;
  Eigen::MatrixXd ground_truth;      // n x m
  Eigen::VectorXd linear_weights;    // linear kind only
  std::vector<int> function_kinds;   // nonlinear kind: 0 sin, 1 tanh, 2 square, 3 identity
  Eigen::VectorXd thresholds;        // piecewise kind
  Eigen::VectorXd coefficients;      // piecewise kind
};

XaiData gen_xai_dataset(const XaiDatasetSpec& spec);

}  // namespace imn
