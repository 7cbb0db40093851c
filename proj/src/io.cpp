#include "qpredict/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "qpredict/error.hpp"

namespace qpredict {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double number_field(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw Error(ErrorKind::parse_error, std::string("state field '") + key + "' is missing or not a number");
  }
  return obj[key].get<double>();
}

GridSpec grid_field(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_object()) {
    throw Error(ErrorKind::parse_error, std::string("state field '") + key + "' must be an object");
  }
  const json& g = obj[key];
  if (!g.contains("n") || !g["n"].is_number_integer() || g["n"].get<long long>() < 0) {
    throw Error(ErrorKind::parse_error, std::string("grid '") + key + "' needs a non-negative integer n");
  }
  return make_grid(number_field(g, "min"), number_field(g, "max"), g["n"].get<std::size_t>());
}

json grid_json(const GridSpec& g) { return {{"min", g.min()}, {"max", g.max()}, {"n", g.size()}}; }

}  // namespace

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      out += format17(row[k]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Complex> read_amplitude_csv(const fs::path& path, std::size_t n1, std::size_t n2) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot read amplitude file '" + path.string() + "'");
  std::vector<Complex> amp(n1 * n2, Complex{0.0, 0.0});
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lf,%lf%c", &i, &j, &re, &im, &tail) != 4) {
      if (line_no == 1) continue;  // header
      throw Error(ErrorKind::parse_error,
                  path.filename().string() + ":" + std::to_string(line_no) + ": expected i,j,re,im");
    }
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n1 || static_cast<std::size_t>(j) >= n2) {
      throw Error(ErrorKind::parse_error,
                  path.filename().string() + ":" + std::to_string(line_no) + ": index outside the grid");
    }
    amp[static_cast<std::size_t>(i) * n2 + static_cast<std::size_t>(j)] = Complex{re, im};
  }
  return amp;
}

std::string amplitude_csv(const WaveFunction2& psi) {
  std::string out = "i,j,re,im\n";
  const std::size_t n2 = psi.grid2.size();
  for (std::size_t i = 0; i < psi.grid1.size(); ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const Complex a = psi.amp[i * n2 + j];
      if (a == Complex{0.0, 0.0}) continue;
      out += std::to_string(i) + "," + std::to_string(j) + "," + format17(a.real()) + "," + format17(a.imag()) + "\n";
    }
  }
  return out;
}

LoadedState parse_state(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw Error(ErrorKind::parse_error, "state must be an object with a string 'kind'");
  }
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "gaussian") {
    GaussianParams params{number_field(doc, "mu1"), number_field(doc, "mu2"), number_field(doc, "sigma"),
                          number_field(doc, "c")};
    params.validate();
    const GridSpec grid = grid_field(doc, "grid");
    json desc = {{"kind", "gaussian"},      {"mu1", params.mu1}, {"mu2", params.mu2},
                 {"sigma", params.sigma},   {"c", params.c},     {"grid", grid_json(grid)}};
    return LoadedState{params, gaussian_wavefunction(params, grid, grid), std::move(desc)};
  }
  if (kind == "grid") {
    const GridSpec g1 = grid_field(doc, "grid1");
    const GridSpec g2 = grid_field(doc, "grid2");
    if (!doc.contains("amp_file") || !doc["amp_file"].is_string()) {
      throw Error(ErrorKind::parse_error, "grid state needs a string 'amp_file'");
    }
    fs::path amp_path = doc["amp_file"].get<std::string>();
    if (amp_path.is_relative()) amp_path = base_dir / amp_path;
    WaveFunction2 psi(g1, g2, read_amplitude_csv(amp_path, g1.size(), g2.size()));
    json desc = {{"kind", "grid"},
                 {"grid1", grid_json(g1)},
                 {"grid2", grid_json(g2)},
                 {"amp_file", doc["amp_file"].get<std::string>()}};
    return LoadedState{std::nullopt, normalize(std::move(psi)), std::move(desc)};
  }
  throw Error(ErrorKind::parse_error, "unknown state kind '" + kind + "'");
}

LoadedState load_state(const fs::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_state(doc, path.parent_path());
}

void ArtifactSet::add(std::string name, std::string content) {
  files_.emplace_back(std::move(name), std::move(content));
}

void ArtifactSet::commit(const fs::path& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot create output directory '" + dir.string() + "': " + ec.message());

  const std::string suffix = ".tmp-" + std::to_string(::getpid());
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir / ("." + name + suffix);
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorKind::io_error, "cannot write '" + (dir / name).string() + "'");
    }
  }
  for (std::size_t k = 0; k < files_.size(); ++k) {
    fs::rename(temps[k], dir / files_[k].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorKind::io_error, "cannot publish '" + (dir / files_[k].first).string() + "': " + ec.message());
    }
  }
}

}  // namespace qpredict
