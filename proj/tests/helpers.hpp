#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline std::filesystem::path fixture_dir() { return DENOM_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return DENOM_GOLDEN_DIR; }
inline std::filesystem::path cli_bin() { return DENOM_CLI_BIN; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / ("denom_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

inline std::string shell_quote(const std::string& arg) {
  std::string quoted = "'";
  for (const char c : arg) {
    if (c == '\'') {
      quoted += "'\\''";
    } else {
      quoted += c;
    }
  }
  quoted += "'";
  return quoted;
}

// Runs the CLI with the given arguments, capturing stdout+stderr.
inline CommandResult run_cli(const std::vector<std::string>& args) {
  TempDir scratch;
  const auto capture = scratch / "output.txt";
  std::string command = shell_quote(cli_bin().string());
  for (const auto& arg : args) command += " " + shell_quote(arg);
  command += " > " + shell_quote(capture.string()) + " 2>&1";
  const int status = std::system(command.c_str());
  CommandResult result;
  result.output = read_file(capture);
  if (status == -1) {
    result.exit_code = -1;
  } else {
    result.exit_code = WEXITSTATUS(status);
  }
  return result;
}

}  // namespace testutil
