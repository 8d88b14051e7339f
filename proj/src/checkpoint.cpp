#include <bit>
#include <cstring>
#include <fstream>
#include <system_error>

#include "hvns/nse_solver.hpp"

namespace hvns {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_double(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

Field field_from_samples(const Grid& grid, const std::array<Eigen::ArrayXd, 3>& samples) {
  VectorSamples<double> vs{Samples(grid, samples[0]), Samples(grid, samples[1]), Samples(grid, samples[2])};
  return leray_project(dealias(to_spectral(vs)));
}

}  // namespace

Field Checkpoint::field() const { return field_from_samples(build_grid(n, L), samples); }

Field canonicalize_from_samples(const Field& u) {
  const auto s = to_physical(u);
  return field_from_samples(u.grid(), {s[0].values(), s[1].values(), s[2].values()});
}

void write_checkpoint(const std::filesystem::path& path, const SolverState& state) {
  const auto& g = state.grid();
  std::string blob = std::string(kCheckpointMagic) + " hyperviscous NSE velocity samples\n";
  put_u64(blob, std::uint64_t(g.n()));
  put_double(blob, g.box_length());
  put_double(blob, state.t);
  put_double(blob, state.params.nu);
  put_double(blob, state.params.eps_hyper);
  put_double(blob, state.params.l_hyper);
  put_u64(blob, std::uint64_t(state.step));
  const auto samples = to_physical(state.u);
  for (int c = 0; c < 3; ++c) {
    for (double v : samples[c].values()) put_double(blob, v);
  }

  // Write beside the target and rename so an interrupted write never leaves a torn file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + tmp.string());
    os.write(blob.data(), std::streamsize(blob.size()));
    if (!os) throw IoError("failed writing checkpoint: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + path.string() + " (" + ec.message() + ")");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  std::string header;
  std::getline(is, header);
  if (header.rfind(kCheckpointMagic, 0) != 0) throw IoError("not an HVNS1 checkpoint: " + path.string());
  std::string body((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  constexpr std::size_t kHeaderBytes = 7 * 8;
  if (body.size() < kHeaderBytes) throw IoError("truncated checkpoint header: " + path.string());

  Checkpoint ck;
  const char* p = body.data();
  const std::uint64_t n = get_u64(p);
  if (n < 4 || n % 2 != 0 || n > 4096) throw IoError("invalid grid size in checkpoint: " + path.string());
  ck.n = int(n);
  ck.L = std::bit_cast<double>(get_u64(p + 8));
  ck.t = std::bit_cast<double>(get_u64(p + 16));
  ck.nu = std::bit_cast<double>(get_u64(p + 24));
  ck.eps_hyper = std::bit_cast<double>(get_u64(p + 32));
  ck.l_hyper = std::bit_cast<double>(get_u64(p + 40));
  ck.step = std::int64_t(get_u64(p + 48));
  const std::size_t count = std::size_t(n) * n * n;
  if (body.size() != kHeaderBytes + 3 * count * 8) throw IoError("checkpoint size mismatch: " + path.string());
  p += kHeaderBytes;
  for (int c = 0; c < 3; ++c) {
    ck.samples[c].resize(Index(count));
    for (std::size_t i = 0; i < count; ++i, p += 8) ck.samples[c][Index(i)] = std::bit_cast<double>(get_u64(p));
  }
  return ck;
}

}  // namespace hvns
