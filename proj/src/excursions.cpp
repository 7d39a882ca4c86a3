#include "loctime/excursions.hpp"

#include <cmath>
#include <deque>
#include <ostream>
#include <string>

namespace loctime {

ReturnTimes return_times(const WalkPath& path, std::uint64_t up_to) {
  ReturnTimes out;
  std::int64_t prev = 0;
  path.scan(up_to, [&](std::uint64_t i, std::int64_t s) {
    if (s == 0) {
      out.rho.push_back(i);
      if (prev == 1) out.rho_plus.push_back(i);
    }
    prev = s;
  });
  return out;
}

std::vector<Excursion> classify_excursions(const WalkPath& path, std::int64_t level) {
  std::vector<Excursion> out;
  bool open = level == 0;
  std::uint64_t start = 0;
  Direction sign = Direction::up;
  std::int64_t prev = 0;
  path.scan(path.length(), [&](std::uint64_t i, std::int64_t s) {
    if (prev == level) sign = s > level ? Direction::up : Direction::down;
    if (s == level) {
      if (open) out.push_back({start, i, sign});
      open = true;
      start = i;
    }
    prev = s;
  });
  return out;
}

DirectionalLocalTime directional_counts(const WalkPath& path, std::int64_t k, std::uint64_t n) {
  DirectionalLocalTime out{k, n, 0, 0};
  std::int64_t prev = 0;
  path.scan(n, [&](std::uint64_t, std::int64_t s) {
    if (prev == k) ++(s > k ? out.up : out.down);
    prev = s;
  });
  return out;
}

void write_excursions_csv(std::ostream& out, std::span<const Excursion> excursions) {
  out << "start,end,sign,length\n";
  for (const auto& e : excursions) {
    out << e.start << ',' << e.end << ',' << (e.sign == Direction::up ? "up" : "down") << ','
        << e.length() << '\n';
  }
}

BlockSchedule::BlockSchedule(unsigned max_level) : max_level_(max_level) {
  if (max_level < 1 || max_level > 62) throw std::invalid_argument("block level out of range");
}

std::uint64_t BlockSchedule::boundary(unsigned level) const {
  return level == 0 ? 0 : std::uint64_t{1} << level;
}

std::uint64_t BlockSchedule::block_size(unsigned level) const {
  if (level < 1 || level > max_level_) throw std::out_of_range("block level");
  return boundary(level) - boundary(level - 1);
}

double BlockSchedule::threshold(unsigned level) const {
  return std::pow(static_cast<double>(block_size(level)), 4.0 / 3.0);
}

std::vector<SpliceChoice> splice_plan(std::span<const std::uint64_t> lengths1,
                                      std::span<const std::uint64_t> lengths2,
                                      const BlockSchedule& schedule) {
  const std::uint64_t total = schedule.total();
  if (lengths1.size() < total || lengths2.size() < total)
    throw InsufficientExcursions("splice needs " + std::to_string(total) +
                                 " completed zero excursions in each walk");
  std::vector<SpliceChoice> plan;
  plan.reserve(total);
  for (unsigned l = 1; l <= schedule.max_level(); ++l) {
    const std::uint64_t first = schedule.boundary(l - 1);
    const std::uint64_t last = schedule.boundary(l);
    std::deque<std::uint64_t> donors;
    for (std::uint64_t i = first; i < last; ++i)
      if (!schedule.is_large(l, lengths2[i])) donors.push_back(i);
    for (std::uint64_t i = first; i < last; ++i) {
      if (schedule.is_large(l, lengths1[i]) || donors.empty()) {
        plan.push_back({1, i});
      } else {
        plan.push_back({2, donors.front()});
        donors.pop_front();
      }
    }
  }
  return plan;
}

StepSequence splice_walks(const WalkPath& walk1, const WalkPath& walk2,
                          const BlockSchedule& schedule) {
  const auto exc1 = classify_excursions(walk1, 0);
  const auto exc2 = classify_excursions(walk2, 0);
  std::vector<std::uint64_t> len1(exc1.size()), len2(exc2.size());
  for (std::size_t i = 0; i < exc1.size(); ++i) len1[i] = exc1[i].length();
  for (std::size_t i = 0; i < exc2.size(); ++i) len2[i] = exc2[i].length();
  const auto plan = splice_plan(len1, len2, schedule);

  StepSequence out;
  for (const auto& choice : plan) {
    const auto& e = choice.source == 1 ? exc1[choice.index] : exc2[choice.index];
    out.append_range(choice.source == 1 ? walk1.steps() : walk2.steps(), e.start, e.end);
  }
  return out;
}

}  // namespace loctime
