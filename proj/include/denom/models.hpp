#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "denom/features.hpp"

namespace denom {

enum class Target { D, Change };

std::string_view target_name(Target target);

struct FeatureMask {
  std::array<bool, kFeatureCount> included{true, true, true, true};

  static FeatureMask all();
  static FeatureMask of(std::initializer_list<std::string_view> names);

  std::size_t count() const;
  std::vector<std::string> names() const;
  bool operator==(const FeatureMask&) const = default;
};

struct ModelSpec {
  Target target = Target::Change;
  FeatureMask mask;
};

struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
};

// Weights are in standardized units, ordered like mask.names(); scaling holds
// the per-feature training mean/std that predict() reapplies.
struct FitResult {
  Target target = Target::Change;
  FeatureMask mask;
  std::vector<double> weights;
  double intercept = 0.0;
  std::vector<Standardization> scaling;
  FitDiagnostics diagnostics;
};

struct StandardizedColumn {
  std::vector<double> zscores;
  Standardization scaling;
};

// (x - mean) / std with the sample (n-1) std; throws DegenerateDataError on a
// constant column.
StandardizedColumn standardize(std::span<const double> column);

// Low-level fitters over raw columns (columns[j] has one value per row).
// fit_linear_cols: ordinary least squares on standardized columns via normal
// equations and a symmetric positive-definite solve.
// fit_logistic_cols: IRLS maximum likelihood with L2 ridge 1e-6 on weights
// (not intercept); converged when the max absolute update < 1e-10, cap 100.
FitResult fit_linear_cols(std::span<const std::vector<double>> columns,
                          std::span<const double> y, const ModelSpec& spec);
FitResult fit_logistic_cols(std::span<const std::vector<double>> columns,
                            std::span<const double> y, const ModelSpec& spec);

// FeatureVector adapters. fit_linear trains on the changed rows only (the D
// target is undefined elsewhere); fit_logistic trains on every row and needs
// both classes and >= 10 rows.
FitResult fit_linear(std::span<const FeatureVector> rows, const ModelSpec& spec);
FitResult fit_logistic(std::span<const FeatureVector> rows, const ModelSpec& spec);

// D target: predicted lag in years; Change target: probability in (0, 1).
double predict(const FitResult& fit, const FeatureVector& row);

double sigmoid(double x);

// The five-row mask sequences of the published weight tables.
std::span<const FeatureMask> ablation_masks(Target target);

std::vector<FitResult> ablation_run(std::span<const FeatureVector> rows, Target target);

// Flat key-value model file; round-trips losslessly (%.17g).
void save_model(const FitResult& fit, const std::filesystem::path& path);
FitResult load_model(const std::filesystem::path& path);

}  // namespace denom
