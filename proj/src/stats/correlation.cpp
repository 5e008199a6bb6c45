#include "emosura/stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace emosura::stats {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw LengthMismatch("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw EmptyList("correlation needs at least two points");
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ZeroVariance("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PearsonResult pearson_test(std::span<const double> x, std::span<const double> y) {
  PearsonResult out;
  out.r = pearson(x, y);
  const std::size_t n = x.size();
  if (n < 3) return out;
  const double df = static_cast<double>(n - 2);
  if (std::abs(out.r) >= 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
  const boost::math::students_t dist(df);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return out;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const int dx = sign(x[i] - x[j]);
      const int dy = sign(y[i] - y[j]);
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if (dx == dy) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double a = static_cast<double>(concordant + discordant + tie_x);
  const double b = static_cast<double>(concordant + discordant + tie_y);
  if (a == 0.0 || b == 0.0) throw AllTied("all pairs tied");
  return static_cast<double>(concordant - discordant) / std::sqrt(a * b);
}

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

SamplewiseTau samplewise_tau(const std::vector<GroupedPair>& groups) {
  SamplewiseTau out;
  double sum = 0.0;
  for (const auto& g : groups) {
    if (g.x.size() != g.y.size() || g.x.size() < 2) continue;
    try {
      sum += kendall_tau(g.x, g.y);
      ++out.groups_used;
    } catch (const AllTied&) {
    }
  }
  if (out.groups_used > 0) out.tau = sum / static_cast<double>(out.groups_used);
  return out;
}

LengthStats length_stats(const std::vector<std::string>& captions) {
  if (captions.empty()) throw EmptyList("length_stats needs at least one caption");
  LengthStats out;
  std::vector<double> lengths;
  lengths.reserve(captions.size());
  for (const auto& c : captions) {
    const auto len = utf8_length(c);
    lengths.push_back(static_cast<double>(len));
    out.max_chars = std::max(out.max_chars, len);
  }
  const double n = static_cast<double>(lengths.size());
  out.mean_chars = std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
  double sq = 0.0;
  for (const double l : lengths) sq += (l - out.mean_chars) * (l - out.mean_chars);
  out.std_chars = std::sqrt(sq / n);
  return out;
}

}  // namespace emosura::stats
