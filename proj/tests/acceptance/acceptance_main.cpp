// Acceptance suite: runs every acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

#include <malloc.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "denom/error.hpp"
#include "denom/features.hpp"
#include "denom/lexicon.hpp"
#include "denom/models.hpp"
#include "denom/ngram.hpp"
#include "denom/report.hpp"
#include "denom/rng.hpp"
#include "denom/stats.hpp"
#include "denom/synth.hpp"
#include "denom/text.hpp"

namespace fs = std::filesystem;
using namespace denom;

namespace {

struct Scratch {
  fs::path root;
  Scratch() {
    std::random_device rd;
    root = fs::temp_directory_path() / ("denom_acceptance_" + std::to_string(rd()));
    fs::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct ChildRun {
  int exit_code = -1;
  long max_rss_kb = 0;
  double seconds = 0.0;
};

// Runs the CLI as a child process and reports its exit code, peak RSS and
// wall time (rusage via wait4).
ChildRun run_cli_child(const std::vector<std::string>& args) {
  std::vector<std::string> argv_storage;
  argv_storage.push_back(DENOM_CLI_BIN);
  for (const auto& arg : args) argv_storage.push_back(arg);
  std::vector<char*> argv;
  for (auto& arg : argv_storage) argv.push_back(arg.data());
  argv.push_back(nullptr);

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = fork();
  if (pid == 0) {
    // quiet child: stdout to /dev/null, keep stderr
    FILE* devnull = std::fopen("/dev/null", "w");
    if (devnull) dup2(fileno(devnull), STDOUT_FILENO);
    execv(argv[0], argv.data());
    _exit(127);
  }
  ChildRun run;
  if (pid < 0) return run;
  int status = 0;
  struct rusage usage {};
  if (wait4(pid, &status, 0, &usage) < 0) return run;
  run.seconds = seconds_since(start);
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  run.max_rss_kb = usage.ru_maxrss;
  return run;
}

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

// --- criterion 1: p-value reproduction from published (r, n) pairs ----------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  struct Bracket {
    double r_lo, r_hi;
    std::size_t n;
    double table_p;                 // published value the p interval must bracket
    double window_lo, window_hi;    // stated window the p interval must stay inside
  };
  // p is decreasing in r, so the computed interval is [p(r_hi), p(r_lo)].
  const std::vector<Bracket> brackets{
      {0.465, 0.475, 291, 1.53e-17, 0.0, 1.0},
      {0.255, 0.265, 291, 8.73e-6, 0.0, 1.0},
      {0.505, 0.515, 31, 0.0031, 0.0025, 0.0040},
      {0.375, 0.385, 31, 0.035, 0.030, 0.040},
  };
  for (const auto& bracket : brackets) {
    const double p_at_hi = p_from_r(bracket.r_hi, bracket.n);
    const double p_at_lo = p_from_r(bracket.r_lo, bracket.n);
    const bool brackets_table = p_at_hi <= bracket.table_p && bracket.table_p <= p_at_lo;
    const bool inside_window = p_at_hi >= bracket.window_lo && p_at_lo <= bracket.window_hi;
    if (!brackets_table || !inside_window) {
      pass = false;
      detail += " miss at n=" + std::to_string(bracket.n) + " r=[" + fmt(bracket.r_lo) + "," +
                fmt(bracket.r_hi) + "] p=[" + fmt(p_at_hi) + "," + fmt(p_at_lo) + "]";
    }
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) pass = false;
  report(1, "p-value reproduction from published (r, n) pairs", pass,
         "p(0.51,31)=" + fmt(p_from_r(0.51, 31)) + ", p(0.38,31)=" + fmt(p_from_r(0.38, 31)) +
             detail + ", " + fmt(elapsed) + "s");
}

// --- criterion 2: statistical oracle equivalence ----------------------------

void criterion_2(const fs::path& fixtures) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::size_t cases = 0;
  double worst = 0.0;

  {
    std::ifstream in(fixtures / "oracle" / "stats_cases.tsv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto f = split(line, '\t');
      if (f.size() != 14) {
        pass = false;
        break;
      }
      std::vector<double> xs, ys;
      for (const auto item : split(f[3], ',')) xs.push_back(*parse_double(item));
      for (const auto item : split(f[4], ',')) ys.push_back(*parse_double(item));
      const auto msx = mean_std(xs);
      const auto msy = mean_std(ys);
      const auto corr = pearson(xs, ys);
      const auto tt = welch_t(xs, ys);
      const double devs[] = {
          std::fabs(msx.mean - *parse_double(f[5])), std::fabs(msx.std - *parse_double(f[6])),
          std::fabs(msy.mean - *parse_double(f[7])), std::fabs(msy.std - *parse_double(f[8])),
          std::fabs(corr.r - *parse_double(f[9])),
          std::fabs(corr.p_two_tailed - *parse_double(f[10])),
          std::fabs(tt.t - *parse_double(f[11])), std::fabs(tt.df - *parse_double(f[12])),
          std::fabs(tt.p_two_tailed - *parse_double(f[13]))};
      for (const double dev : devs) {
        worst = std::max(worst, dev);
        if (dev >= 1e-10) pass = false;
      }
      ++cases;
    }
    if (cases != 1000) pass = false;
  }

  double worst_sf = 0.0;
  {
    std::ifstream in(fixtures / "oracle" / "t_sf_grid.tsv");
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      const auto f = split(line, '\t');
      const double dev =
          std::fabs(student_t_sf(*parse_double(f[1]), *parse_double(f[0])) - *parse_double(f[2]));
      worst_sf = std::max(worst_sf, dev);
      if (dev >= 1e-12) pass = false;
      ++rows;
    }
    if (rows != 7 * 65) pass = false;
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) pass = false;
  report(2, "statistical oracle equivalence", pass,
         std::to_string(cases) + " vector cases worst=" + fmt(worst) + ", t_sf grid worst=" +
             fmt(worst_sf) + ", " + fmt(elapsed) + "s");
}

// --- criterion 3: regression correctness -------------------------------------

void criterion_3() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  // exact noiseless linear recovery
  {
    SplitMix64 rng(1234);
    const std::size_t n = 2000;
    std::vector<std::vector<double>> cols(4);
    for (std::size_t i = 0; i < n; ++i) {
      cols[0].push_back(static_cast<double>(rng.next_int(3, 12)));
      cols[1].push_back(std::exp(rng.next_normal()));
      cols[2].push_back(std::exp(rng.next_normal()));
      cols[3].push_back(1.0 + rng.next_poisson(2.0));
    }
    std::vector<std::vector<double>> z;
    for (const auto& col : cols) z.push_back(standardize(col).zscores);
    const std::vector<double> truth{3.69, -33.22, 33.97, 53.47};
    std::vector<double> y(n, 150.0);
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t i = 0; i < n; ++i) y[i] += truth[j] * z[j][i];
    }
    const auto fit = fit_linear_cols(cols, y, ModelSpec{Target::D, FeatureMask::all()});
    double worst = std::fabs(fit.intercept - 150.0);
    for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::fabs(fit.weights[j] - truth[j]));
    if (worst >= 1e-8) {
      pass = false;
      detail += " linear worst=" + fmt(worst);
    } else {
      detail += "linear worst=" + fmt(worst);
    }
  }

  // planted logistic recovery on 20 seeds
  {
    const std::array<double, kFeatureCount> truth{-0.9, 0.0, -1.4, 0.0};
    const double intercept = -0.5;
    int good_seeds = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      SplitMix64 rng(seed * 7919);
      const std::size_t n = 20000;
      std::vector<std::vector<double>> cols(4);
      for (std::size_t i = 0; i < n; ++i) {
        cols[0].push_back(static_cast<double>(rng.next_int(3, 12)));
        cols[1].push_back(std::exp(rng.next_normal()));
        cols[2].push_back(std::exp(rng.next_normal()));
        cols[3].push_back(1.0 + rng.next_poisson(2.0));
      }
      std::vector<std::vector<double>> z;
      for (const auto& col : cols) z.push_back(standardize(col).zscores);
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        double eta = intercept;
        for (std::size_t j = 0; j < 4; ++j) eta += truth[j] * z[j][i];
        y[i] = rng.next_unit() < sigmoid(eta) ? 1.0 : 0.0;
      }
      const auto fit = fit_logistic_cols(cols, y, ModelSpec{Target::Change, FeatureMask::all()});
      bool seed_ok = fit.diagnostics.converged && std::fabs(fit.intercept - intercept) < 0.1;
      for (std::size_t j = 0; j < 4; ++j) {
        if (std::fabs(fit.weights[j] - truth[j]) >= 0.1) seed_ok = false;
        if (std::fabs(truth[j]) >= 0.5 && (truth[j] > 0) != (fit.weights[j] > 0)) seed_ok = false;
      }
      good_seeds += seed_ok ? 1 : 0;
    }
    detail += ", logistic seeds " + std::to_string(good_seeds) + "/20";
    if (good_seeds < 19) pass = false;
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) pass = false;
  report(3, "regression correctness", pass, detail + ", " + fmt(elapsed) + "s");
}

// --- criterion 4: end-to-end sign-structure reproduction ---------------------

void criterion_4(const fs::path& scratch) {
  const auto start = std::chrono::steady_clock::now();
  int good_seeds = 0;
  std::string detail;

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PlantSpec spec = default_plant_spec();  // the paper-echo sign pattern
    spec.n_words = 4000;
    spec.seed = seed * 1013;
    const fs::path dir = scratch / ("e2e_" + std::to_string(seed));
    bool seed_ok = true;
    try {
      const auto plant = generate(spec, dir);
      const auto entries = load_lexicon(plant.lexicon_path);
      const auto ingested = ingest_files({plant.ngrams_path}, lexicon_vocabulary(entries));
      const auto totals = load_totals(plant.totals_path);
      const auto outcomes = derive_outcomes(entries, spec.from_year, spec.to_year);
      const auto table = build_feature_table(ingested.index, totals, outcomes, entries,
                                             spec.from_year, spec.to_year, spec.window);

      std::vector<WindowInput> inputs{WindowInput{1, table.rows}};
      AnalysisOptions options;
      options.from_year = spec.from_year;
      options.to_year = spec.to_year;
      const auto analysis = build_report(inputs, options);

      // t-test on word length must separate the classes
      const auto& length_test = analysis["windows"][0]["t_tests"][0];
      if (length_test["status"] != "ok" || !(length_test["p"].get<double>() < 0.01)) {
        seed_ok = false;
      }
      // logistic mask {length, recent_freq}: both weights negative
      const auto& logistic = analysis["models"]["logistic_change"][3];
      if (logistic["status"] != "ok" || !(logistic["weights"]["length"].get<double>() < 0.0) ||
          !(logistic["weights"]["recent_freq"].get<double>() < 0.0)) {
        seed_ok = false;
      }
      // linear mask {recent_freq, sense_count}: both weights positive
      const auto& linear = analysis["models"]["linear_d"][2];
      if (linear["status"] != "ok" || !(linear["weights"]["recent_freq"].get<double>() > 0.0) ||
          !(linear["weights"]["sense_count"].get<double>() > 0.0)) {
        seed_ok = false;
      }
    } catch (const std::exception& e) {
      seed_ok = false;
      detail += std::string(" seed") + std::to_string(seed) + ":" + e.what();
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    good_seeds += seed_ok ? 1 : 0;
  }

  const double elapsed = seconds_since(start);
  bool pass = good_seeds >= 19 && elapsed < 300.0;
  report(4, "end-to-end sign-structure reproduction", pass,
         std::to_string(good_seeds) + "/20 seeds, " + fmt(elapsed) + "s" + detail);
}

// --- criterion 5: golden toy pipeline through the CLI ------------------------

void criterion_5(const fs::path& fixtures, const fs::path& golden, const fs::path& scratch) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  const fs::path toy = fixtures / "toy";
  const fs::path dir = scratch / "toy_cli";
  fs::create_directories(dir);
  const std::string index = (dir / "index.tsv").string();

  auto run = run_cli_child({"ingest", "--ngrams", (toy / "ngrams.tsv").string(), "--totals",
                            (toy / "totals.tsv").string(), "--lexicon",
                            (toy / "lexicon.csv").string(), "--out", index});
  if (run.exit_code != 0) pass = false;
  if (read_file(index) != read_file(golden / "toy_index.tsv")) {
    pass = false;
    detail += " index-mismatch";
  }

  std::vector<std::string> feature_files;
  for (const int window : {1, 2, 3}) {
    const std::string out = (dir / ("w" + std::to_string(window) + ".csv")).string();
    run = run_cli_child({"features", "--index", index, "--lexicon", (toy / "lexicon.csv").string(),
                         "--from", "1500", "--to", "2000", "--window", std::to_string(window),
                         "--out", out});
    if (run.exit_code != 0) pass = false;
    if (read_file(out) !=
        read_file(golden / ("toy_features_w" + std::to_string(window) + ".csv"))) {
      pass = false;
      detail += " features-w" + std::to_string(window) + "-mismatch";
    }
    feature_files.push_back(out);
  }

  // cohort shape check on the window-1 table: 8 rows, 3 changed
  const auto rows = read_feature_csv(feature_files[0]);
  std::size_t changed = 0;
  for (const auto& row : rows) changed += row.change ? 1 : 0;
  if (rows.size() != 8 || changed != 3) {
    pass = false;
    detail += " cohort-counts";
  }

  const std::string report_path = (dir / "report.json").string();
  run = run_cli_child({"analyze", "--features", feature_files[0], "--features", feature_files[1],
                       "--features", feature_files[2], "--windows", "1,2,3", "--from", "1500",
                       "--to", "2000", "--out", report_path});
  if (run.exit_code != 0) pass = false;
  if (read_file(report_path) != read_file(golden / "toy_report.json")) {
    pass = false;
    detail += " report-mismatch";
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) pass = false;
  report(5, "golden toy pipeline byte-identical", pass,
         (detail.empty() ? "index+features+report match" : detail) + ", " + fmt(elapsed) + "s");
}

// --- criterion 6: window-sweep invariant -------------------------------------

void criterion_6(const fs::path& golden, const fs::path& scratch) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  const auto check_dataset = [&](const std::vector<std::vector<FeatureVector>>& tables,
                                 const char* label) {
    std::vector<WindowInput> inputs;
    for (std::size_t w = 0; w < tables.size(); ++w) {
      inputs.push_back(WindowInput{static_cast<int>(w + 1), tables[w]});
    }
    // recent_freq rowwise non-decreasing in window
    for (std::size_t w = 1; w < tables.size(); ++w) {
      for (std::size_t i = 0; i < tables[w].size(); ++i) {
        if (tables[w][i].recent_freq < tables[w - 1][i].recent_freq) {
          pass = false;
          detail += std::string(" recent-not-monotone-") + label;
        }
      }
    }
    const auto analysis = build_report(inputs, AnalysisOptions{});
    const auto& blocks = analysis["windows"];
    for (const std::size_t feature : {0u, 1u, 3u}) {  // length, accum, sense_count
      for (std::size_t w = 1; w < blocks.size(); ++w) {
        const auto& first = blocks[0]["correlations_vs_d"][feature];
        const auto& other = blocks[w]["correlations_vs_d"][feature];
        // bit-identical across windows
        if (first["r"].get<double>() != other["r"].get<double>() ||
            first["p"].get<double>() != other["p"].get<double>()) {
          pass = false;
          detail += std::string(" corr-not-identical-") + label;
        }
      }
    }
  };

  {
    std::vector<std::vector<FeatureVector>> toy_tables;
    for (const int window : {1, 2, 3}) {
      toy_tables.push_back(
          read_feature_csv(golden / ("toy_features_w" + std::to_string(window) + ".csv")));
    }
    check_dataset(toy_tables, "toy");
  }
  {
    PlantSpec spec = default_plant_spec();
    spec.n_words = 500;
    spec.seed = 60660;
    const auto plant = generate(spec, scratch / "sweep");
    const auto entries = load_lexicon(plant.lexicon_path);
    const auto ingested = ingest_files({plant.ngrams_path}, lexicon_vocabulary(entries));
    const auto totals = load_totals(plant.totals_path);
    const auto outcomes = derive_outcomes(entries, spec.from_year, spec.to_year);
    std::vector<std::vector<FeatureVector>> tables;
    for (const int window : {1, 2, 3}) {
      tables.push_back(build_feature_table(ingested.index, totals, outcomes, entries,
                                           spec.from_year, spec.to_year, window)
                           .rows);
    }
    check_dataset(tables, "synthetic");
  }

  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) pass = false;
  report(6, "window-sweep invariant", pass,
         (detail.empty() ? "toy + synthetic datasets" : detail) + ", " + fmt(elapsed) + "s");
}

// --- criterion 7: ingestion scaling ------------------------------------------

void write_big_ngram_file(const fs::path& path, std::size_t lines) {
  // 5000 distinct tokens, 1000 of them in the vocabulary, cycling over 200
  // years. The (token, year) domain is fully covered after 1M lines, so a
  // longer file only adds duplicate lines that sum in place: extra lines must
  // not grow the index.
  std::ofstream out(path, std::ios::binary);
  std::string buffer;
  buffer.reserve(1 << 22);
  for (std::size_t i = 0; i < lines; ++i) {
    const unsigned token = static_cast<unsigned>(i % 5000);
    const unsigned year = 1500 + static_cast<unsigned>((i / 5000) % 200);
    buffer += "w";
    buffer += std::to_string(token);
    buffer += "_NOUN\t";
    buffer += std::to_string(year);
    buffer += "\t3\t1\n";
    if (buffer.size() > (1 << 22) - 64) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

void criterion_7(const fs::path& scratch) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = scratch / "scaling";
  fs::create_directories(dir);

  // Return freed heap to the OS first: the child's ru_maxrss includes the
  // pre-exec copy-on-write pages inherited at fork, so a bloated parent would
  // drown out the measurement.
  malloc_trim(0);

  {
    std::ofstream lexicon(dir / "lexicon.csv");
    lexicon << "word,pos,start_year\n";
    for (int i = 0; i < 1000; ++i) lexicon << "w" << i << ",noun,1600\n";
    std::ofstream totals(dir / "totals.tsv");
    for (int year = 1500; year < 2000; ++year) totals << year << "\t1000000\t0\t0\n";
  }

  write_big_ngram_file(dir / "small.tsv", 1'000'000);
  write_big_ngram_file(dir / "big.tsv", 10'000'000);

  const auto ingest = [&](const char* input, const char* output) {
    return run_cli_child({"ingest", "--ngrams", (dir / input).string(), "--totals",
                          (dir / "totals.tsv").string(), "--lexicon",
                          (dir / "lexicon.csv").string(), "--out", (dir / output).string()});
  };
  const auto small = ingest("small.tsv", "small_index.tsv");
  const auto big = ingest("big.tsv", "big_index.tsv");

  bool pass = small.exit_code == 0 && big.exit_code == 0;
  if (small.seconds >= 30.0) pass = false;
  if (small.max_rss_kb <= 0 || big.max_rss_kb >= 2 * small.max_rss_kb) pass = false;

  std::error_code ec;
  fs::remove_all(dir, ec);
  report(7, "ingestion scaling", pass,
         "1M lines in " + fmt(small.seconds) + "s rss=" + std::to_string(small.max_rss_kb) +
             "KB; 10M rss=" + std::to_string(big.max_rss_kb) + "KB; total " +
             fmt(seconds_since(start)) + "s");
}

}  // namespace

int main() {
  const fs::path fixtures = DENOM_FIXTURE_DIR;
  const fs::path golden = DENOM_GOLDEN_DIR;
  Scratch scratch;

  criterion_1();
  criterion_2(fixtures);
  criterion_3();
  criterion_4(scratch.root);
  criterion_5(fixtures, golden, scratch.root);
  criterion_6(golden, scratch.root);
  criterion_7(scratch.root);

  if (g_failures == 0) {
    std::printf("all 7 acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", g_failures);
  return 1;
}
