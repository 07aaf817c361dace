#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace contactrom {

/// Error type thrown across the library for invalid inputs and numerical failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace util {

/// SHA-256 of a byte buffer, lowercase hex.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::filesystem::path& path);

/// Raw little-endian float64 column-major matrix blobs.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path, Eigen::Index rows,
                            Eigen::Index cols);

/// Runs fn(i) for i in [0, n). Results must be written to per-index slots by the
/// caller; iteration order is unspecified but the output layout is deterministic.
void parallel_for(int n, const std::function<void(int)>& fn, int n_threads = 0);

/// Worker count: explicit argument, else CONTACTROM_THREADS, else hardware.
int resolve_threads(int requested = 0);

class Timer {
 public:
  Timer() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

/// Shortest decimal string that round-trips a double (used for CSV/JSON output).
std::string format_double(double v);

}  // namespace util
}  // namespace contactrom
