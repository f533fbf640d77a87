#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hartree/checkpoint.hpp"
#include "hartree/errors.hpp"

using namespace hartree;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "hartree_unit";
  fs::create_directories(dir);
  return dir / name;
}

} // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("binary checkpoints round-trip exactly") {
  const auto g = make_grid(64, 4.0);
  const RadialField u = RadialField::from_function(g, [](double r) { return std::polar(std::exp(-r), r); });
  const auto path = scratch("roundtrip.chk");
  write_checkpoint(path, u, 1.25, {{"kind", "test"}});
  const Checkpoint c = read_checkpoint(path);
  CHECK(c.time == 1.25);
  CHECK(c.meta.at("kind") == "test");
  CHECK(c.field.grid().size() == 64);
  CHECK(c.field.grid().r_max() == 4.0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(c.field[i] == u[i]);
}

TEST_CASE("text checkpoints with r re im triples are ingested") {
  const auto path = scratch("field.txt");
  {
    std::ofstream out(path);
    out << "# r re im\n";
    for (int i = 0; i < 10; ++i) out << (i + 0.5) * 0.1 << ' ' << i << ' ' << -i << '\n';
  }
  const Checkpoint c = read_checkpoint(path);
  CHECK(c.field.size() == 10);
  CHECK(c.field.grid().r_max() == doctest::Approx(1.0));
  CHECK(c.field[4] == cplx(4.0, -4.0));
}

TEST_CASE("malformed checkpoints raise I/O errors") {
  CHECK_THROWS_AS(read_checkpoint(scratch("missing.chk")), IoError);

  const auto bad_header = scratch("bad_header.chk");
  std::ofstream(bad_header) << "{\"format_version\": 1, \"n\": \n";
  CHECK_THROWS_AS(read_checkpoint(bad_header), IoError);

  const auto wrong_version = scratch("wrong_version.chk");
  std::ofstream(wrong_version) << "{\"format_version\":2,\"n\":8,\"r_max\":1,\"time\":0,\"meta\":{}}\n";
  CHECK_THROWS_AS(read_checkpoint(wrong_version), IoError);

  const auto truncated = scratch("truncated.chk");
  std::ofstream(truncated) << "{\"format_version\":1,\"n\":8,\"r_max\":1,\"time\":0,\"meta\":{}}\n" << "abc";
  CHECK_THROWS_AS(read_checkpoint(truncated), IoError);

  const auto uneven = scratch("uneven.txt");
  std::ofstream(uneven) << "0.05 1 0\n0.15 1 0\n0.3 1 0\n";
  CHECK_THROWS_AS(read_checkpoint(uneven), IoError);
}

}
