#include "loctime/walk.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>

namespace loctime {

namespace {

std::uint64_t low_mask(unsigned nbits) {
  return nbits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << nbits) - 1);
}

}  // namespace

StepSequence StepSequence::from_steps(std::span<const int> steps) {
  StepSequence out;
  out.reserve(steps.size());
  for (int s : steps) out.push_back(s);
  return out;
}

void StepSequence::push_back(int step) {
  if (step != 1 && step != -1) throw std::invalid_argument("step must be +1 or -1");
  if ((size_ & 63) == 0) words_.push_back(0);
  if (step == 1) words_.back() |= std::uint64_t{1} << (size_ & 63);
  ++size_;
}

void StepSequence::append_word(std::uint64_t word, unsigned nbits) {
  if (nbits == 0) return;
  if (nbits > 64) throw std::invalid_argument("at most 64 bits per word");
  word &= low_mask(nbits);
  const unsigned offset = static_cast<unsigned>(size_ & 63);
  if (offset == 0) {
    words_.push_back(word);
  } else {
    words_.back() |= word << offset;
    if (offset + nbits > 64) words_.push_back(word >> (64 - offset));
  }
  size_ += nbits;
}

void StepSequence::append_range(const StepSequence& src, std::uint64_t begin, std::uint64_t end) {
  if (begin > end || end > src.size()) throw std::out_of_range("bad step range");
  std::uint64_t i = begin;
  while (i < end) {
    const unsigned shift = static_cast<unsigned>(i & 63);
    const unsigned take =
        static_cast<unsigned>(std::min<std::uint64_t>(end - i, 64 - shift));
    append_word(src.words_[i >> 6] >> shift, take);
    i += take;
  }
}

std::vector<int> StepSequence::to_vector() const {
  std::vector<int> out(size_);
  for (std::uint64_t i = 0; i < size_; ++i) out[i] = step(i);
  return out;
}

StepSequence simulate_walk(std::uint64_t n, RngStream& rng) {
  StepSequence out;
  out.reserve(n);
  for (std::uint64_t done = 0; done < n; done += 64) {
    const std::uint64_t word = rng.next_u64();
    out.append_word(word, static_cast<unsigned>(std::min<std::uint64_t>(64, n - done)));
  }
  return out;
}

void write_snapshot(std::ostream& out, const StepSequence& steps) {
  std::array<char, 8> header{};
  for (int b = 0; b < 8; ++b) header[b] = static_cast<char>((steps.size() >> (8 * b)) & 0xFF);
  out.write(header.data(), 8);
  const std::uint64_t nbytes = (steps.size() + 7) / 8;
  const auto words = steps.words();
  for (std::uint64_t b = 0; b < nbytes; ++b) {
    const char byte = static_cast<char>((words[b / 8] >> (8 * (b % 8))) & 0xFF);
    out.put(byte);
  }
  if (!out) throw std::runtime_error("snapshot write failed");
}

StepSequence read_snapshot(std::istream& in) {
  std::array<unsigned char, 8> header{};
  in.read(reinterpret_cast<char*>(header.data()), 8);
  if (!in) throw std::runtime_error("snapshot: truncated header");
  std::uint64_t n = 0;
  for (int b = 0; b < 8; ++b) n |= std::uint64_t{header[b]} << (8 * b);
  StepSequence out;
  out.reserve(n);
  std::uint64_t done = 0;
  while (done < n) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("snapshot: truncated body");
    const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(8, n - done));
    if (take < 8 && (static_cast<unsigned>(c) >> take) != 0)
      throw std::runtime_error("snapshot: nonzero padding bits");
    out.append_word(static_cast<std::uint64_t>(c), take);
    done += take;
  }
  return out;
}

std::int64_t WalkPath::position(std::uint64_t i) const {
  check_time(i);
  const auto words = steps_->words();
  std::uint64_t ups = 0;
  const std::uint64_t full = i >> 6;
  for (std::uint64_t w = 0; w < full; ++w) ups += std::popcount(words[w]);
  if (const unsigned rem = static_cast<unsigned>(i & 63); rem != 0)
    ups += std::popcount(words[full] & low_mask(rem));
  return 2 * static_cast<std::int64_t>(ups) - static_cast<std::int64_t>(i);
}

std::vector<std::int64_t> WalkPath::positions(std::uint64_t n) const {
  std::vector<std::int64_t> out;
  out.reserve(n + 1);
  out.push_back(0);
  scan(n, [&](std::uint64_t, std::int64_t s) { out.push_back(s); });
  return out;
}

LevelWindow::LevelWindow(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_) {
  if (lo > hi) throw std::invalid_argument("level window must be nonempty");
}

std::uint64_t LocalTimeProfile::total() const {
  std::uint64_t sum = below + above;
  for (auto c : counts) sum += c;
  return sum;
}

std::uint64_t local_time(const WalkPath& path, std::int64_t k, std::uint64_t n) {
  std::uint64_t count = 0;
  path.scan(n, [&](std::uint64_t, std::int64_t s) { count += (s == k); });
  return count;
}

std::int64_t centered_local_time(const WalkPath& path, std::int64_t k, std::uint64_t n) {
  if (k < 1) throw std::invalid_argument("centered local time needs k >= 1");
  return static_cast<std::int64_t>(local_time(path, k, n)) -
         static_cast<std::int64_t>(local_time(path, 0, n));
}

std::uint64_t default_zero_stride(std::uint64_t n) {
  constexpr std::uint64_t million = 1'000'000;
  if (n <= million) return 1;
  return (n + million / 2) / million;
}

LocalTimeAccumulator::LocalTimeAccumulator(LevelWindow window)
    : window_(window),
      band_lo_(std::min<std::int64_t>(window.lo, 0)),
      band_hi_(std::max<std::int64_t>(window.hi, 0)),
      counts_(window.width(), 0) {}

void LocalTimeAccumulator::feed(std::uint64_t word, unsigned nbits) {
  const auto span = static_cast<std::int64_t>(nbits);
  if (position_ - span > band_hi_ || position_ + span < band_lo_) {
    const auto ups = static_cast<std::int64_t>(std::popcount(word & low_mask(nbits)));
    (position_ > band_hi_ ? above_ : below_) += nbits;
    position_ += 2 * ups - span;
    time_ += nbits;
    return;
  }
  for (unsigned b = 0; b < nbits; ++b, word >>= 1) {
    position_ += (word & 1U) ? 1 : -1;
    if (position_ == 0) ++zeros_;
    if (position_ < window_.lo) {
      ++below_;
    } else if (position_ > window_.hi) {
      ++above_;
    } else {
      ++counts_[static_cast<std::size_t>(position_ - window_.lo)];
    }
  }
  time_ += nbits;
}

namespace {

struct ProfileSink {
  LocalTimeAccumulator acc;
  std::uint64_t stride;
  std::vector<std::uint64_t> zero_series;

  void feed(std::uint64_t word, unsigned nbits) { acc.feed(word, nbits); }
};

template <class Drive>
LocalTimeProfile build_profile(std::uint64_t n, LevelWindow window, std::uint64_t zero_stride,
                               Drive&& drive) {
  ProfileSink sink{LocalTimeAccumulator(window), zero_stride, {}};
  if (zero_stride > 0) sink.zero_series.reserve(n / zero_stride);
  std::uint64_t done = 0;
  while (done < n) {
    std::uint64_t next = n;
    if (zero_stride > 0) next = std::min(n, (done / zero_stride + 1) * zero_stride);
    drive(sink, next - done);
    done = next;
    if (zero_stride > 0 && done % zero_stride == 0) sink.zero_series.push_back(sink.acc.zero_count());
  }
  LocalTimeProfile out;
  out.base_time = n;
  out.window = window;
  out.counts = sink.acc.counts();
  out.below = sink.acc.below();
  out.above = sink.acc.above();
  out.zero_stride = zero_stride;
  out.zero_series = std::move(sink.zero_series);
  return out;
}

}  // namespace

LocalTimeProfile local_time_profile(const WalkPath& path, std::uint64_t n, LevelWindow window,
                                    std::uint64_t zero_stride) {
  path.check_time(n);
  const auto words = path.steps().words();
  std::uint64_t cursor = 0;
  return build_profile(n, window, zero_stride, [&](ProfileSink& sink, std::uint64_t steps) {
    while (steps > 0) {
      const unsigned shift = static_cast<unsigned>(cursor & 63);
      const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(steps, 64 - shift));
      sink.feed(words[cursor >> 6] >> shift, take);
      cursor += take;
      steps -= take;
    }
  });
}

LocalTimeProfile stream_local_time_profile(std::uint64_t n, LevelWindow window, RngStream& rng,
                                           std::uint64_t zero_stride) {
  StepSource source(rng);
  return build_profile(n, window, zero_stride, [&](ProfileSink& sink, std::uint64_t steps) {
    source.advance(steps, sink);
  });
}

CensoredWalk::CensoredWalk(LevelWindow window, bool record_steps)
    : window_(window), record_(record_steps) {
  if (!window_.contains(0)) throw std::invalid_argument("censored walk window must contain 0");
}

std::int64_t CensoredWalk::step(RngStream& rng) {
  const int s = rng.sign();
  previous_ = position_;
  if ((s > 0 && position_ == window_.hi) || (s < 0 && position_ == window_.lo)) {
    previous_ = position_ + s;
    if (record_) {
      steps_.push_back(s);
      steps_.push_back(-s);
    }
    time_ += 2;
    return position_;
  }
  position_ += s;
  if (record_) steps_.push_back(s);
  ++time_;
  return position_;
}

}  // namespace loctime
