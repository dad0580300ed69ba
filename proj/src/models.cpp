#include "denom/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "denom/error.hpp"
#include "denom/stats.hpp"
#include "denom/text.hpp"

namespace denom {
namespace {

constexpr double kRidge = 1e-6;           // L2 on weights, not the intercept
constexpr double kIrlsTolerance = 1e-10;  // max absolute coefficient update
constexpr int kIrlsMaxIterations = 100;
constexpr double kIrlsStepCap = 15.0;     // keeps quasi-separable fits stable
constexpr double kRankTolerance = 1e-10;  // relative, on Cholesky pivots

// Dense symmetric positive-definite solve (Cholesky), row-major k x k.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t k) {
  std::vector<double> original_diag(k);
  for (std::size_t i = 0; i < k; ++i) original_diag[i] = a[i * k + i];

  for (std::size_t j = 0; j < k; ++j) {
    double d = a[j * k + j];
    for (std::size_t m = 0; m < j; ++m) d -= a[j * k + m] * a[j * k + m];
    if (!(d > kRankTolerance * std::max(original_diag[j], 1e-300))) {
      throw RankDeficientError("design matrix singular beyond relative tolerance 1e-10");
    }
    const double l = std::sqrt(d);
    a[j * k + j] = l;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = a[i * k + j];
      for (std::size_t m = 0; m < j; ++m) s -= a[i * k + m] * a[j * k + m];
      a[i * k + j] = s / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < k; ++i) {
    double s = b[i];
    for (std::size_t m = 0; m < i; ++m) s -= a[i * k + m] * b[m];
    b[i] = s / a[i * k + i];
  }
  for (std::size_t ii = k; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t m = ii + 1; m < k; ++m) s -= a[m * k + ii] * b[m];
    b[ii] = s / a[ii * k + ii];
  }
  return b;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

struct StandardizedDesign {
  std::vector<std::vector<double>> z;  // one column per included feature
  std::vector<Standardization> scaling;
};

StandardizedDesign standardize_design(std::span<const std::vector<double>> columns) {
  StandardizedDesign design;
  for (const auto& column : columns) {
    auto [zscores, scaling] = standardize(column);
    design.z.push_back(std::move(zscores));
    design.scaling.push_back(scaling);
  }
  return design;
}

std::vector<double> assemble_column(std::span<const FeatureVector> rows, std::size_t feature) {
  std::vector<double> column;
  column.reserve(rows.size());
  for (const auto& row : rows) column.push_back(feature_value(row, feature));
  return column;
}

std::vector<std::vector<double>> masked_columns(std::span<const FeatureVector> rows,
                                                const FeatureMask& mask) {
  std::vector<std::vector<double>> columns;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (mask.included[f]) columns.push_back(assemble_column(rows, f));
  }
  return columns;
}

}  // namespace

std::string_view target_name(Target target) { return target == Target::D ? "d" : "change"; }

FeatureMask FeatureMask::all() { return FeatureMask{}; }

FeatureMask FeatureMask::of(std::initializer_list<std::string_view> names) {
  FeatureMask mask;
  mask.included.fill(false);
  for (const auto name : names) {
    const auto idx = feature_index(name);
    if (!idx) throw Error("unknown feature name: " + std::string(name));
    mask.included[*idx] = true;
  }
  return mask;
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(included.begin(), included.end(), true));
}

std::vector<std::string> FeatureMask::names() const {
  std::vector<std::string> out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (included[f]) out.emplace_back(kFeatureNames[f]);
  }
  return out;
}

StandardizedColumn standardize(std::span<const double> column) {
  const MeanStd ms = mean_std(column);
  if (ms.std == 0.0) throw DegenerateDataError("standardize: constant column");
  StandardizedColumn out;
  out.scaling = Standardization{ms.mean, ms.std};
  out.zscores.reserve(column.size());
  for (const double x : column) out.zscores.push_back((x - ms.mean) / ms.std);
  return out;
}

FitResult fit_linear_cols(std::span<const std::vector<double>> columns,
                          std::span<const double> y, const ModelSpec& spec) {
  const std::size_t n = y.size();
  const std::size_t k = columns.size();
  if (k == 0) throw Error("fit_linear: empty feature mask");
  if (n < k + 2) throw DegenerateDataError("fit_linear needs at least features + 2 rows");
  for (const auto& column : columns) {
    if (column.size() != n) throw Error("fit_linear: column length mismatch");
  }

  auto design = standardize_design(columns);
  const std::size_t dim = k + 1;  // intercept first
  std::vector<double> xtx(dim * dim, 0.0);
  std::vector<double> xty(dim, 0.0);
  xtx[0] = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) xty[0] += y[i];
  for (std::size_t j = 0; j < k; ++j) {
    const auto& zj = design.z[j];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += zj[i];
    xtx[(j + 1) * dim] = xtx[j + 1] = s;
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sy += zj[i] * y[i];
    xty[j + 1] = sy;
    for (std::size_t j2 = j; j2 < k; ++j2) {
      const auto& z2 = design.z[j2];
      double szz = 0.0;
      for (std::size_t i = 0; i < n; ++i) szz += zj[i] * z2[i];
      xtx[(j + 1) * dim + (j2 + 1)] = xtx[(j2 + 1) * dim + (j + 1)] = szz;
    }
  }

  const auto beta = solve_spd(std::move(xtx), std::move(xty), dim);

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = beta[0];
    for (std::size_t j = 0; j < k; ++j) fitted += beta[j + 1] * design.z[j][i];
    rss += (y[i] - fitted) * (y[i] - fitted);
  }

  FitResult fit;
  fit.target = spec.target;
  fit.mask = spec.mask;
  fit.intercept = beta[0];
  fit.weights.assign(beta.begin() + 1, beta.end());
  fit.scaling = std::move(design.scaling);
  fit.diagnostics = FitDiagnostics{1, true, rss};
  return fit;
}

FitResult fit_logistic_cols(std::span<const std::vector<double>> columns,
                            std::span<const double> y, const ModelSpec& spec) {
  const std::size_t n = y.size();
  const std::size_t k = columns.size();
  if (k == 0) throw Error("fit_logistic: empty feature mask");
  if (n < 10) throw DegenerateDataError("fit_logistic needs at least 10 rows");
  for (const auto& column : columns) {
    if (column.size() != n) throw Error("fit_logistic: column length mismatch");
  }
  bool has_positive = false;
  bool has_negative = false;
  for (const double label : y) {
    if (label != 0.0 && label != 1.0) throw Error("fit_logistic: labels must be 0/1");
    (label == 1.0 ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw DegenerateDataError("fit_logistic: single-class target");
  }

  auto design = standardize_design(columns);
  const std::size_t dim = k + 1;
  std::vector<double> beta(dim, 0.0);
  std::vector<double> eta(n), prob(n);

  int iterations = 0;
  bool converged = false;
  while (iterations < kIrlsMaxIterations && !converged) {
    ++iterations;
    for (std::size_t i = 0; i < n; ++i) {
      double e = beta[0];
      for (std::size_t j = 0; j < k; ++j) e += beta[j + 1] * design.z[j][i];
      eta[i] = e;
      prob[i] = sigmoid(e);
    }
    std::vector<double> hessian(dim * dim, 0.0);
    std::vector<double> gradient(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
      const double resid = y[i] - prob[i];
      gradient[0] += resid;
      hessian[0] += w;
      for (std::size_t j = 0; j < k; ++j) {
        const double zij = design.z[j][i];
        gradient[j + 1] += resid * zij;
        hessian[j + 1] += w * zij;           // row 0
        for (std::size_t j2 = j; j2 < k; ++j2) {
          hessian[(j + 1) * dim + (j2 + 1)] += w * zij * design.z[j2][i];
        }
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      gradient[j + 1] -= kRidge * beta[j + 1];
      hessian[(j + 1) * dim + (j + 1)] += kRidge;
      hessian[(j + 1) * dim] = hessian[j + 1];  // mirror row 0 / column 0
      for (std::size_t j2 = j + 1; j2 < k; ++j2) {
        hessian[(j2 + 1) * dim + (j + 1)] = hessian[(j + 1) * dim + (j2 + 1)];
      }
    }

    auto step = solve_spd(std::move(hessian), std::move(gradient), dim);
    double max_step = 0.0;
    for (const double s : step) max_step = std::max(max_step, std::fabs(s));
    if (max_step > kIrlsStepCap) {
      const double scale = kIrlsStepCap / max_step;
      for (double& s : step) s *= scale;
      max_step = kIrlsStepCap;
    }
    for (std::size_t j = 0; j < dim; ++j) beta[j] += step[j];
    converged = max_step < kIrlsTolerance;
  }

  double penalized_nll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = beta[0];
    for (std::size_t j = 0; j < k; ++j) e += beta[j + 1] * design.z[j][i];
    penalized_nll += y[i] == 1.0 ? softplus(-e) : softplus(e);
  }
  for (std::size_t j = 0; j < k; ++j) penalized_nll += 0.5 * kRidge * beta[j + 1] * beta[j + 1];

  FitResult fit;
  fit.target = spec.target;
  fit.mask = spec.mask;
  fit.intercept = beta[0];
  fit.weights.assign(beta.begin() + 1, beta.end());
  fit.scaling = std::move(design.scaling);
  fit.diagnostics = FitDiagnostics{iterations, converged, penalized_nll};
  return fit;
}

FitResult fit_linear(std::span<const FeatureVector> rows, const ModelSpec& spec) {
  if (spec.target != Target::D) throw Error("fit_linear expects the d target");
  std::vector<FeatureVector> changed;
  for (const auto& row : rows) {
    if (row.change) changed.push_back(row);
  }
  std::vector<double> y;
  y.reserve(changed.size());
  for (const auto& row : changed) y.push_back(static_cast<double>(*row.lag));
  return fit_linear_cols(masked_columns(changed, spec.mask), y, spec);
}

FitResult fit_logistic(std::span<const FeatureVector> rows, const ModelSpec& spec) {
  if (spec.target != Target::Change) throw Error("fit_logistic expects the change target");
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& row : rows) y.push_back(row.change ? 1.0 : 0.0);
  return fit_logistic_cols(masked_columns(rows, spec.mask), y, spec);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double predict(const FitResult& fit, const FeatureVector& row) {
  double eta = fit.intercept;
  std::size_t slot = 0;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!fit.mask.included[f]) continue;
    const auto& scaling = fit.scaling[slot];
    eta += fit.weights[slot] * (feature_value(row, f) - scaling.mean) / scaling.std;
    ++slot;
  }
  return fit.target == Target::Change ? sigmoid(eta) : eta;
}

std::span<const FeatureMask> ablation_masks(Target target) {
  // Mask sequences mirror the five-row structure of the published weight
  // tables (rows 4-5 rerun earlier masks on another interval).
  static const std::vector<FeatureMask> kDMasks = {
      FeatureMask::all(),
      FeatureMask::of({"accum_freq", "recent_freq", "sense_count"}),
      FeatureMask::of({"recent_freq", "sense_count"}),
      FeatureMask::all(),
      FeatureMask::of({"recent_freq", "sense_count"}),
  };
  static const std::vector<FeatureMask> kChangeMasks = {
      FeatureMask::all(),
      FeatureMask::of({"length", "accum_freq", "recent_freq"}),
      FeatureMask::of({"length", "accum_freq"}),
      FeatureMask::of({"length", "recent_freq"}),
      FeatureMask::of({"length", "recent_freq"}),
  };
  return target == Target::D ? kDMasks : kChangeMasks;
}

std::vector<FitResult> ablation_run(std::span<const FeatureVector> rows, Target target) {
  std::vector<FitResult> fits;
  for (const auto& mask : ablation_masks(target)) {
    const ModelSpec spec{target, mask};
    fits.push_back(target == Target::D ? fit_linear(rows, spec) : fit_logistic(rows, spec));
  }
  return fits;
}

void save_model(const FitResult& fit, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file: " + path.string());
  out << "format denom-model/1\n";
  out << "target " << target_name(fit.target) << '\n';
  const auto names = fit.mask.names();
  out << "features ";
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  out << "intercept " << format_g17(fit.intercept) << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << "weight " << names[j] << ' ' << format_g17(fit.weights[j]) << '\n';
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << "scale " << names[j] << ' ' << format_g17(fit.scaling[j].mean) << ' '
        << format_g17(fit.scaling[j].std) << '\n';
  }
  out << "iterations " << fit.diagnostics.iterations << '\n';
  out << "converged " << (fit.diagnostics.converged ? 1 : 0) << '\n';
  out << "final_objective " << format_g17(fit.diagnostics.final_objective) << '\n';
  if (!out.flush()) throw FormatError("failed writing model file: " + path.string());
}

FitResult load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file: " + path.string());
  const auto fail = [&](const std::string& what) {
    throw FormatError(path.string() + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line) || line != "format denom-model/1") {
    fail("not a denom-model/1 file");
  }

  FitResult fit;
  std::vector<std::string> names;
  std::map<std::string, double> weights;
  std::map<std::string, Standardization> scales;
  bool have_target = false, have_intercept = false, have_iterations = false,
       have_converged = false, have_objective = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "target") {
      std::string value;
      fields >> value;
      if (value == "d") {
        fit.target = Target::D;
      } else if (value == "change") {
        fit.target = Target::Change;
      } else {
        fail("unknown target `" + value + "`");
      }
      have_target = true;
    } else if (key == "features") {
      std::string value;
      fields >> value;
      fit.mask.included.fill(false);
      for (const auto name : split(value, ',')) {
        const auto idx = feature_index(name);
        if (!idx) fail("unknown feature `" + std::string(name) + "`");
        fit.mask.included[*idx] = true;
        names.emplace_back(name);
      }
      if (names.empty()) fail("empty feature list");
    } else if (key == "intercept") {
      fields >> fit.intercept;
      have_intercept = true;
    } else if (key == "weight") {
      std::string name;
      double value;
      fields >> name >> value;
      weights[name] = value;
    } else if (key == "scale") {
      std::string name;
      Standardization scaling;
      fields >> name >> scaling.mean >> scaling.std;
      scales[name] = scaling;
    } else if (key == "iterations") {
      fields >> fit.diagnostics.iterations;
      have_iterations = true;
    } else if (key == "converged") {
      int flag = 0;
      fields >> flag;
      fit.diagnostics.converged = flag != 0;
      have_converged = true;
    } else if (key == "final_objective") {
      fields >> fit.diagnostics.final_objective;
      have_objective = true;
    } else {
      fail("unknown key `" + key + "`");
    }
    if (!fields) fail("malformed `" + key + "` line");
  }

  if (!have_target || !have_intercept || !have_iterations || !have_converged || !have_objective ||
      names.empty()) {
    fail("incomplete model file");
  }
  for (const auto& name : names) {
    const auto w = weights.find(name);
    const auto s = scales.find(name);
    if (w == weights.end() || s == scales.end()) fail("missing weight or scale for `" + name + "`");
    if (!(s->second.std > 0.0)) fail("non-positive std for `" + name + "`");
    fit.weights.push_back(w->second);
    fit.scaling.push_back(s->second);
  }
  if (weights.size() != names.size() || scales.size() != names.size()) {
    fail("weight/scale entries do not match the feature list");
  }
  return fit;
}

}  // namespace denom
