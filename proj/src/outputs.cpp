#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "htpkit/fixture_io.hpp"
#include "htpkit/harness.hpp"

#ifndef HTPKIT_VERSION
#define HTPKIT_VERSION "dev"
#endif
#ifndef HTPKIT_BUILD_TYPE
#define HTPKIT_BUILD_TYPE "unknown"
#endif

namespace htpkit {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& message) { throw Error(ErrorCode::io, message); }

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_error(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) io_error(fmt::format("failed writing {}", path.string()));
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_argument, fmt::format("bad value '{}' for {}", text, key));
  }
  return value;
}

std::vector<double> parse_real_list(std::string_view text, std::string_view key) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = trim(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(parse_number<double>(item, key));
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorCode::invalid_argument, fmt::format("bad boolean '{}' for {}", text, key));
}

std::string join_reals(const std::vector<double>& values) { return fmt::format("{}", fmt::join(values, ",")); }

std::string join_algorithms(const std::vector<Algorithm>& algorithms) {
  std::vector<std::string_view> names;
  for (Algorithm a : algorithms) names.push_back(to_string(a));
  return fmt::format("{}", fmt::join(names, ","));
}

}  // namespace

void ensure_writable_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir, ec)) io_error(fmt::format("unwritable directory: {} is not a directory", dir.string()));
  const fs::path probe = dir / ".htpkit_write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out || !(out << "probe") || !out.flush()) {
      io_error(fmt::format("unwritable directory: cannot create files in {}", dir.string()));
    }
  }
  fs::remove(probe, ec);
}

void write_cells_csv(std::ostream& out, const PhaseGrid& grid) {
  out << "algorithm,delta,rho,m,s,trials,successes,success_rate\n";
  for (std::size_t k = 0; k < grid.algorithms.size(); ++k) {
    for (const PhaseCell& cell : grid.cells) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(grid.algorithms[k]), cell.key.delta, cell.key.rho,
                         cell.key.m, cell.key.s, cell.trials, cell.successes[k], cell.success_rate(k));
    }
  }
}

void write_contour_csv(std::ostream& out, const PhaseGrid& grid, const std::vector<double>& levels) {
  out << "algorithm,level,delta,rho_max\n";
  for (Algorithm algorithm : grid.algorithms) {
    for (double level : levels) {
      for (const ContourPoint& p : extract_success_contour(grid, algorithm, level)) {
        out << fmt::format("{},{},{},{}\n", to_string(algorithm), level, p.delta, p.rho_max);
      }
    }
  }
}

void write_trials_csv(std::ostream& out, const PhaseGrid& grid) {
  out << "algorithm,delta,rho,m,s,trial,success,relative_error,iterations,converged,wall_seconds,failure\n";
  if (!grid.trials) return;
  for (const TrialRecord& rec : *grid.trials) {
    for (const AlgorithmTrial& r : rec.results) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.algorithm), rec.cell.delta,
                         rec.cell.rho, rec.cell.m, rec.cell.s, rec.trial, r.success ? 1 : 0,
                         io::format_real(r.relative_error), r.iterations, r.converged ? 1 : 0, r.wall_seconds,
                         r.failure);
    }
  }
}

void write_heatmap_svg(std::ostream& out, const PhaseGrid& grid, Algorithm algorithm) {
  const std::size_t slot = grid.slot(algorithm);
  const std::size_t nd = grid.delta_values.size();
  const std::size_t nr = grid.rho_values.size();
  constexpr int cell_px = 48;
  constexpr int left = 70;
  constexpr int top = 40;
  constexpr int bottom = 60;
  const int width = left + static_cast<int>(nd) * cell_px + 20;
  const int height = top + static_cast<int>(nr) * cell_px + bottom;

  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n", width,
      height);
  out << fmt::format(
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{} success "
      "rate</text>\n",
      width / 2, to_string(algorithm));
  // delta runs left to right, rho bottom to top.
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t r = 0; r < nr; ++r) {
      const double rate = grid.cell(d, r).success_rate(slot);
      const int gray = static_cast<int>(std::lround(255.0 * rate));
      const int x = left + static_cast<int>(d) * cell_px;
      const int y = top + static_cast<int>(nr - 1 - r) * cell_px;
      out << fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},{})\" stroke=\"#888\" "
          "stroke-width=\"0.5\"><title>delta={} rho={} rate={}</title></rect>\n",
          x, y, cell_px, cell_px, gray, gray, gray, grid.delta_values[d], grid.rho_values[r], rate);
    }
  }
  const int axis_y = top + static_cast<int>(nr) * cell_px;
  for (std::size_t d = 0; d < nd; ++d) {
    out << fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        left + static_cast<int>(d) * cell_px + cell_px / 2, axis_y + 16, grid.delta_values[d]);
  }
  for (std::size_t r = 0; r < nr; ++r) {
    out << fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        left - 6, top + static_cast<int>(nr - 1 - r) * cell_px + cell_px / 2 + 4, grid.rho_values[r]);
  }
  out << fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">δ = "
      "m/N</text>\n",
      left + static_cast<int>(nd) * cell_px / 2, axis_y + 40);
  out << fmt::format(
      "<text x=\"18\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 {0})\">ρ = s/m</text>\n",
      top + static_cast<int>(nr) * cell_px / 2);
  out << "</svg>\n";
}

std::string build_id() { return fmt::format("htpkit {} ({}, gcc {})", HTPKIT_VERSION, HTPKIT_BUILD_TYPE, __VERSION__); }

void write_metadata(std::ostream& out, const PhaseGrid& grid, const RunConfig& cfg) {
  out << format_run_config(cfg);
  out << fmt::format("build = {}\n", build_id());
  out << fmt::format("runtime_seconds = {:.3f}\n", grid.runtime_seconds);
}

OutputFiles emit_outputs(const PhaseGrid& grid, const RunConfig& cfg, const fs::path& out_dir,
                         const std::vector<double>& contour_levels) {
  ensure_writable_directory(out_dir);
  OutputFiles files;

  files.cells = out_dir / "cells.csv";
  auto cells = open_for_write(files.cells);
  write_cells_csv(cells, grid);
  close_checked(cells, files.cells);

  files.contour = out_dir / "contour.csv";
  auto contour = open_for_write(files.contour);
  write_contour_csv(contour, grid, contour_levels);
  close_checked(contour, files.contour);

  files.metadata = out_dir / "metadata.txt";
  auto meta = open_for_write(files.metadata);
  write_metadata(meta, grid, cfg);
  close_checked(meta, files.metadata);

  for (Algorithm algorithm : grid.algorithms) {
    const fs::path path = out_dir / fmt::format("heatmap_{}.svg", to_string(algorithm));
    auto svg = open_for_write(path);
    write_heatmap_svg(svg, grid, algorithm);
    close_checked(svg, path);
    files.heatmaps.push_back(path);
  }

  if (grid.trials) {
    files.trials = out_dir / "trials.csv";
    auto trials = open_for_write(*files.trials);
    write_trials_csv(trials, grid);
    close_checked(trials, *files.trials);
  }
  return files;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::invalid_argument, fmt::format("config line {}: expected key = value", line_no));
    }
    const std::string_view key = trim(text.substr(0, eq));
    const std::string_view value = trim(text.substr(eq + 1));

    if (key == "signal_length") cfg.signal_length = parse_number<Index>(value, key);
    else if (key == "delta_values") cfg.delta_values = parse_real_list(value, key);
    else if (key == "rho_values") cfg.rho_values = parse_real_list(value, key);
    else if (key == "trials_per_cell") cfg.trials_per_cell = parse_number<Index>(value, key);
    else if (key == "algorithms") cfg.algorithms = parse_algorithm_list(value);
    else if (key == "base_seed") cfg.base_seed = parse_number<std::uint64_t>(value, key);
    else if (key == "success_tolerance") cfg.success_tolerance = parse_number<double>(value, key);
    else if (key == "htp.max_iterations") cfg.htp_config.max_iterations = parse_number<Index>(value, key);
    else if (key == "htp.support_stable_stop") cfg.htp_config.support_stable_stop = parse_bool(value, key);
    else if (key == "htp.residual_tolerance") cfg.htp_config.residual_tolerance = parse_number<double>(value, key);
    else if (key == "htp.step_size") cfg.htp_config.step_size = parse_number<double>(value, key);
    else if (key == "ensemble") {
      if (value == "gaussian") cfg.ensemble = Ensemble::gaussian;
      else if (value == "identity") cfg.ensemble = Ensemble::identity;
      else throw Error(ErrorCode::invalid_argument, fmt::format("unknown ensemble '{}'", value));
    } else {
      throw Error(ErrorCode::invalid_argument, fmt::format("config line {}: unknown key '{}'", line_no, key));
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_error(fmt::format("cannot open config {}", path.string()));
  return parse_run_config(in);
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  out += fmt::format("signal_length = {}\n", cfg.signal_length);
  out += fmt::format("delta_values = {}\n", join_reals(cfg.delta_values));
  out += fmt::format("rho_values = {}\n", join_reals(cfg.rho_values));
  out += fmt::format("trials_per_cell = {}\n", cfg.trials_per_cell);
  out += fmt::format("algorithms = {}\n", join_algorithms(cfg.algorithms));
  out += fmt::format("base_seed = {}\n", cfg.base_seed);
  out += fmt::format("success_tolerance = {}\n", cfg.success_tolerance);
  out += fmt::format("htp.max_iterations = {}\n", cfg.htp_config.max_iterations);
  out += fmt::format("htp.support_stable_stop = {}\n", cfg.htp_config.support_stable_stop);
  out += fmt::format("htp.residual_tolerance = {}\n", cfg.htp_config.residual_tolerance);
  out += fmt::format("htp.step_size = {}\n", cfg.htp_config.step_size);
  out += fmt::format("ensemble = {}\n", cfg.ensemble == Ensemble::identity ? "identity" : "gaussian");
  return out;
}

}  // namespace htpkit
