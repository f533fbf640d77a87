#include "hartree/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

Checkpoint read_binary(std::istream &in, const std::filesystem::path &path) {
  std::string header_line;
  std::getline(in, header_line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception &e) {
    throw IoError(path.string() + ": malformed checkpoint header: " + e.what());
  }
  if (header.value("format_version", 0) != 1) throw IoError(path.string() + ": unsupported format_version");
  std::size_t n = 0;
  double r_max = 0.0;
  double time = 0.0;
  std::map<std::string, std::string> meta;
  try {
    n = header.at("n").get<std::size_t>();
    r_max = header.at("r_max").get<double>();
    time = header.at("time").get<double>();
    if (header.contains("meta")) meta = header["meta"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw IoError(path.string() + ": incomplete checkpoint header: " + e.what());
  }

  std::vector<double> raw(2 * n);
  in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != raw.size() * sizeof(double)) {
    throw IoError(path.string() + ": truncated checkpoint payload");
  }
  std::vector<cplx> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = {raw[2 * i], raw[2 * i + 1]};
  return {RadialField(make_grid(n, r_max), std::move(values)), time, std::move(meta)};
}

Checkpoint read_text(std::istream &in, const std::filesystem::path &path) {
  std::vector<double> r;
  std::vector<cplx> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double ri = 0.0, re = 0.0, im = 0.0;
    if (!(ls >> ri)) continue;
    if (!(ls >> re >> im)) throw IoError(path.string() + ": expected 'r re im' on every data line");
    r.push_back(ri);
    values.emplace_back(re, im);
  }
  if (r.size() < 2) throw IoError(path.string() + ": too few samples");
  const double dr = r[1] - r[0];
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double expected = (static_cast<double>(i) + 0.5) * dr;
    if (std::abs(r[i] - expected) > 1e-6 * dr) {
      throw IoError(path.string() + ": samples are not on a uniform cell-centred grid");
    }
  }
  const double r_max = dr * static_cast<double>(r.size());
  return {RadialField(make_grid(r.size(), r_max), std::move(values)), 0.0, {}};
}

} // namespace

void write_checkpoint(const std::filesystem::path &path, const RadialField &u, double time,
                      const std::map<std::string, std::string> &meta) {
  nlohmann::json header = {{"format_version", 1},
                           {"n", u.size()},
                           {"r_max", u.grid().r_max()},
                           {"time", time},
                           {"meta", meta}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header.dump() << '\n';
  std::vector<double> raw(2 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    raw[2 * i] = u[i].real();
    raw[2 * i + 1] = u[i].imag();
  }
  out.write(reinterpret_cast<const char *>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  in >> std::ws;
  if (in.peek() == '{') return read_binary(in, path);
  return read_text(in, path);
}

} // namespace hartree
