#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "presstop/driver.hpp"
#include "presstop/problems.hpp"

namespace presstop {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ImageFormat {
  pgm,        // binary P5
  pgm_ascii,  // plain P2
};

ImageFormat parse_image_format(const std::string& name);

// 8-bit gray raster, row-major, row 0 at the top.
struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;

  bool operator==(const GrayImage&) const = default;
};

// round(255 (1 - rho)) clamped to [0, 255]; solid renders black.
std::uint8_t density_to_gray(double rho);

// One pixel per element: pixel (r, c) is element (r, c) of the grid.
GrayImage density_image(const Vector& rho_filt, Index nelx, Index nely);

void write_pgm(const GrayImage& image, const std::string& path, ImageFormat format);
GrayImage read_pgm(const std::string& path);

void write_density_image(const Vector& rho_filt, Index nelx, Index nely, const std::string& path,
                         ImageFormat format = ImageFormat::pgm);

// Header iter,obj,mean_density,change and one row per iteration with
// round-trip precision.
void write_history_csv(const std::vector<IterationRecord>& history, const std::string& path);
// Reads back iter, obj, mean_density and change (compliance is not stored).
std::vector<IterationRecord> read_history_csv(const std::string& path);

nlohmann::json load_config(const std::string& path);

struct RunConfig {
  std::string problem;            // arch, piston, chamber or custom
  std::string spec_path;          // configuration file for custom
  std::string out_dir = ".";
  int snapshot_every = 0;         // 0: final image only
  ImageFormat image_format = ImageFormat::pgm;
  std::optional<Index> nelx;
  std::optional<Index> nely;
  nlohmann::json overrides = nlohmann::json::object();  // configuration keys to replace
};

// Named benchmark or configuration file, with the overrides applied.
ProblemSpec resolve_spec(const RunConfig& config);

struct RunOutputs {
  OptimizationResult result;
  std::string history_path;
  std::string final_image_path;
  std::vector<std::string> snapshot_paths;
};

// Runs the optimization and writes the history and images to config.out_dir.
RunOutputs execute(const RunConfig& config, std::ostream* log = nullptr);

// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace presstop
