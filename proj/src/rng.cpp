#include "loctime/rng.hpp"

#include <cmath>

namespace loctime {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, const std::vector<StreamLabel>& path) {
  std::uint64_t h = splitmix64(master);
  for (const auto& label : path) {
    h = splitmix64(h ^ fnv1a(label.experiment));
    h = splitmix64(h ^ label.index);
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<StreamLabel> path)
    : master_seed_(master_seed),
      path_(std::move(path)),
      engine_seed_(derive_seed(master_seed_, path_)),
      engine_(engine_seed_) {}

RngStream RngStream::child(std::string_view experiment, std::uint64_t index) const {
  auto path = path_;
  path.push_back({std::string(experiment), index});
  return RngStream(master_seed_, std::move(path));
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential() { return -std::log(uniform()); }

unsigned RngStream::bit() {
  if (bits_left_ == 0) {
    bit_buffer_ = engine_();
    bits_left_ = 64;
  }
  const unsigned b = static_cast<unsigned>(bit_buffer_ & 1U);
  bit_buffer_ >>= 1;
  --bits_left_;
  return b;
}

std::string RngStream::path_string() const {
  std::string out = std::to_string(master_seed_);
  for (const auto& label : path_) {
    out += '/';
    out += label.experiment;
    out += ':';
    out += std::to_string(label.index);
  }
  return out;
}

}  // namespace loctime
