#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::stats {

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class AllTied : public Error {
 public:
  using Error::Error;
};

class EmptyList : public Error {
 public:
  using Error::Error;
};

struct PearsonResult {
  double r = 0.0;
  std::optional<double> p_value;  // two-sided, t-approximation; empty for n < 3
};

double pearson(std::span<const double> x, std::span<const double> y);
PearsonResult pearson_test(std::span<const double> x, std::span<const double> y);

/// Tau-b over all pairs. Throws AllTied when either side has no untied pair.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> mid_ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau per group (e.g. one sample across systems), averaged over the
/// groups where it is defined. Empty when no group qualifies.
struct GroupedPair {
  std::vector<double> x;
  std::vector<double> y;
};
struct SamplewiseTau {
  std::optional<double> tau;
  std::size_t groups_used = 0;
};
SamplewiseTau samplewise_tau(const std::vector<GroupedPair>& groups);

struct LengthStats {
  double mean_chars = 0.0;
  double std_chars = 0.0;  // population
  std::size_t max_chars = 0;
};

/// Counts UTF-8 code points.
LengthStats length_stats(const std::vector<std::string>& captions);

}  // namespace emosura::stats
