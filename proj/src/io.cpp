#include "presstop/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace presstop {

namespace fs = std::filesystem;
using nlohmann::json;

ImageFormat parse_image_format(const std::string& name) {
  if (name == "pgm") return ImageFormat::pgm;
  if (name == "pgm-ascii") return ImageFormat::pgm_ascii;
  throw IoError("unknown image format '" + name + "' (pgm, pgm-ascii)");
}

std::uint8_t density_to_gray(double rho) {
  const double v = std::round(255.0 * (1.0 - rho));
  if (!(v >= 0.0)) return 0;  // also maps NaN to black
  return static_cast<std::uint8_t>(std::min(v, 255.0));
}

GrayImage density_image(const Vector& rho_filt, Index nelx, Index nely) {
  if (nelx < 1 || nely < 1 || rho_filt.size() != nelx * nely) {
    throw std::invalid_argument("density_image: field size " + std::to_string(rho_filt.size()) +
                                " does not match " + std::to_string(nelx) + " x " + std::to_string(nely));
  }
  GrayImage img;
  img.width = nelx;
  img.height = nely;
  img.pixels.resize(static_cast<std::size_t>(nelx * nely));
  for (Index r = 0; r < nely; ++r) {
    for (Index c = 0; c < nelx; ++c) {
      img.pixels[static_cast<std::size_t>(r * nelx + c)] = density_to_gray(rho_filt[c * nely + r]);
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::string& path, ImageFormat format) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width * image.height)) {
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  if (format == ImageFormat::pgm) {
    os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(image.pixels.data()),
             static_cast<std::streamsize>(image.pixels.size()));
  } else {
    os << "P2\n" << image.width << ' ' << image.height << "\n255\n";
    for (Index r = 0; r < image.height; ++r) {
      for (Index c = 0; c < image.width; ++c) {
        if (c > 0) os << ' ';
        os << static_cast<int>(image.pixels[static_cast<std::size_t>(r * image.width + c)]);
      }
      os << '\n';
    }
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

namespace {

// Next header token, skipping whitespace and comments.
std::string pgm_token(std::istream& is) {
  std::string tok;
  char ch;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(is, rest);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

long pgm_number(std::istream& is, const std::string& path) {
  const std::string tok = pgm_token(is);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::logic_error&) {
    throw IoError("'" + path + "': malformed PGM header token '" + tok + "'");
  }
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  const std::string magic = pgm_token(is);
  if (magic != "P5" && magic != "P2") throw IoError("'" + path + "' is not a PGM file");
  GrayImage img;
  img.width = pgm_number(is, path);
  img.height = pgm_number(is, path);
  const long maxval = pgm_number(is, path);
  if (maxval != 255) throw IoError("'" + path + "': only 8-bit PGM is supported");
  img.pixels.resize(static_cast<std::size_t>(img.width * img.height));
  if (magic == "P5") {
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
      throw IoError("'" + path + "': truncated pixel data");
    }
  } else {
    for (auto& px : img.pixels) {
      const long v = pgm_number(is, path);
      if (v > 255) throw IoError("'" + path + "': pixel value out of range");
      px = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void write_density_image(const Vector& rho_filt, Index nelx, Index nely, const std::string& path,
                         ImageFormat format) {
  write_pgm(density_image(rho_filt, nelx, nely), path, format);
}

void write_history_csv(const std::vector<IterationRecord>& history, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "iter,obj,mean_density,change\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iter, r.obj, r.mean_density, r.change);
    os << buf;
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

std::vector<IterationRecord> read_history_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != "iter,obj,mean_density,change") {
    throw IoError("'" + path + "': missing history header");
  }
  std::vector<IterationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    IterationRecord r;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf%c", &r.iter, &r.obj, &r.mean_density, &r.change,
                    &tail) != 4) {
      throw IoError("'" + path + "': malformed row '" + line + "'");
    }
    out.push_back(r);
  }
  return out;
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open configuration '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ProblemSpec resolve_spec(const RunConfig& config) {
  json cfg;
  if (config.problem == "custom") {
    if (config.spec_path.empty()) throw ConfigError("problem 'custom' requires --spec FILE");
    cfg = load_config(config.spec_path);
    if (config.nelx) cfg["nelx"] = *config.nelx;
    if (config.nely) cfg["nely"] = *config.nely;
  } else {
    if (!config.spec_path.empty()) throw ConfigError("--spec is only used with problem 'custom'");
    ProblemSpec base = make_named(config.problem);
    if (config.nelx || config.nely) {
      base = make_named(config.problem, config.nelx.value_or(base.nelx), config.nely.value_or(base.nely));
    }
    cfg = to_config(base);
  }
  if (!config.overrides.is_object()) throw ConfigError("overrides must be an object");
  for (const auto& [key, value] : config.overrides.items()) cfg[key] = value;
  return build_custom(cfg);
}

RunOutputs execute(const RunConfig& config, std::ostream* log) {
  if (config.snapshot_every < 0) throw ConfigError("snapshot cadence must be >= 0");
  const ProblemSpec spec = resolve_spec(config);

  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + config.out_dir + "'");
  }
  const std::string stem = (dir / spec.name).string();

  RunOutputs out;
  auto hook = [&](int it, double obj, double mean, double change, const Vector& rho) {
    if (log) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "it.: %4d  obj.: %10.4f  vol.: %6.3f  ch.: %6.3f\n", it, obj,
                    mean, change);
      *log << buf << std::flush;
    }
    if (config.snapshot_every > 0 && it % config.snapshot_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "_it%04d.pgm", it);
      out.snapshot_paths.push_back(stem + name);
      write_density_image(rho, spec.nelx, spec.nely, out.snapshot_paths.back(), config.image_format);
    }
  };
  out.result = optimize(spec, hook);
  out.history_path = stem + "_history.csv";
  out.final_image_path = stem + "_final.pgm";
  write_history_csv(out.result.history, out.history_path);
  write_density_image(out.result.rho_filt, spec.nelx, spec.nely, out.final_image_path,
                      config.image_format);
  if (log) {
    *log << "terminated: " << to_string(out.result.termination)
         << "  design-region mean density: " << out.result.active_mean << '\n';
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topology optimization under design-dependent fluid pressure loads", "presstop"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Optimize a benchmark or a custom configuration");

  std::string names;
  for (const auto& n : problem_names()) names += n + "|";
  names += "custom";

  RunConfig cfg;
  std::string image_format = "pgm";
  Index nelx = 0, nely = 0;
  run->add_option("problem", cfg.problem, "Problem to run: " + names)->required();
  auto* o_nelx = run->add_option("--nelx", nelx, "Elements in x")->check(CLI::PositiveNumber);
  auto* o_nely = run->add_option("--nely", nely, "Elements in y")->check(CLI::PositiveNumber);
  run->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  run->add_option("--snapshot-every", cfg.snapshot_every,
                  "Write a density image every K iterations (0: final only)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--spec", cfg.spec_path, "JSON configuration file (problem 'custom')");
  run->add_option("--image-format", image_format, "pgm or pgm-ascii")
      ->check(CLI::IsMember({"pgm", "pgm-ascii"}));

  struct Scalar {
    const char* flag;
    const char* key;
    const char* help;
    bool integer;
  };
  const std::vector<Scalar> scalars = {
      {"--volfrac", "volfrac", "Volume fraction", false},
      {"--penal", "penal", "SIMP penalization", false},
      {"--rmin", "rmin", "Filter radius", false},
      {"--etaf", "etaf", "Flow Heaviside threshold", false},
      {"--betaf", "betaf", "Flow Heaviside sharpness", false},
      {"--lst", "lst", "Include load sensitivities (0 or 1)", true},
      {"--maxit", "maxit", "Maximum iterations", true},
      {"--move-limit", "move_limit", "MMA move limit", false},
      {"--E0", "E0", "Solid Young's modulus", false},
      {"--Emin", "Emin", "Void Young's modulus", false},
      {"--nu", "nu", "Poisson's ratio", false},
      {"--Kv", "Kv", "Void flow coefficient", false},
      {"--epsf", "epsf", "Flow contrast", false},
      {"--r", "r", "Residual pressure ratio at the penetration depth", false},
      {"--Dels", "Dels", "Penetration depth", false},
      {"--Pin", "Pin", "Applied pressure", false},
  };
  std::vector<double> real_values(scalars.size());
  std::vector<long long> int_values(scalars.size());
  std::vector<CLI::Option*> options;
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    const auto& s = scalars[k];
    options.push_back(s.integer ? run->add_option(s.flag, int_values[k], s.help)
                                : run->add_option(s.flag, real_values[k], s.help));
  }
  options[5]->check(CLI::IsMember({0, 1}));
  options[6]->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*o_nelx) cfg.nelx = nelx;
    if (*o_nely) cfg.nely = nely;
    cfg.image_format = parse_image_format(image_format);
    for (std::size_t k = 0; k < scalars.size(); ++k) {
      if (!*options[k]) continue;
      if (scalars[k].integer) cfg.overrides[scalars[k].key] = int_values[k];
      else cfg.overrides[scalars[k].key] = real_values[k];
    }
    const RunOutputs res = execute(cfg, &out);
    out << "wrote " << res.history_path << " and " << res.final_image_path << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace presstop
