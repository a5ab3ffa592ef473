#pragma once

#include "fedload/analytics.hpp"
#include "fedload/errors.hpp"
#include "fedload/random.hpp"
#include "fedload/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace fedload {

// Synthetic federations. Three marginals drive generation: users per server,
// rooms per user and room size. They are not jointly realizable in general;
// users per server and rooms per user are reproduced exactly (up to the
// user-total adjustment described on generate()), room sizes only
// approximately through the room attractiveness weights.

enum class Family { zipf, lognormal, empirical };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::zipf: return "zipf";
    case Family::lognormal: return "lognormal";
    case Family::empirical: return "empirical";
  }
  return "?";
}

inline Family parse_family(std::string_view s) {
  if (s == "zipf") return Family::zipf;
  if (s == "lognormal") return Family::lognormal;
  if (s == "empirical" || s == "empirical-resample") return Family::empirical;
  throw InvalidArgumentError("unknown distribution family '" + std::string(s) + "'");
}

/// Distribution of a positive count.
///  zipf:      P(k) ~ k^-exponent on 1..max (max == 0: derived from targets)
///  lognormal: round(exp(mu + sigma * N(0,1))), at least 1
///  empirical: resampled from `values`
struct DistributionSpec {
  Family family = Family::zipf;
  double exponent = 2.0;
  std::uint64_t max = 0;
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<std::uint64_t> values;

  static DistributionSpec zipf(double exponent, std::uint64_t max = 0) {
    DistributionSpec d;
    d.family = Family::zipf;
    d.exponent = exponent;
    d.max = max;
    return d;
  }
  static DistributionSpec lognormal(double mu, double sigma) {
    DistributionSpec d;
    d.family = Family::lognormal;
    d.mu = mu;
    d.sigma = sigma;
    return d;
  }
  static DistributionSpec empirical(std::vector<std::uint64_t> values) {
    DistributionSpec d;
    d.family = Family::empirical;
    std::sort(values.begin(), values.end());
    d.values = std::move(values);
    return d;
  }

  void validate(std::string_view what) const {
    auto fail = [&](const std::string& m) { throw InvalidArgumentError(std::string(what) + ": " + m); };
    switch (family) {
      case Family::zipf:
        if (!(exponent >= 0.0) || !std::isfinite(exponent)) fail("zipf exponent must be finite and >= 0");
        if (max > 10'000'000) fail("zipf max above 10^7 is not supported");
        break;
      case Family::lognormal:
        if (!std::isfinite(mu) || !(sigma >= 0.0) || !std::isfinite(sigma)) fail("lognormal needs finite mu, sigma >= 0");
        break;
      case Family::empirical:
        if (values.empty()) fail("empirical distribution needs source values");
        break;
    }
  }

  /// Smallest value the distribution can produce.
  std::uint64_t min_value() const {
    if (family == Family::empirical) return values.front();
    return 1;
  }

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

enum class FillPolicy {
  preferential,  // weight = current size + attractiveness
  proportional,  // weight = attractiveness
  uniform,       // weight = 1
};

inline std::string to_string(FillPolicy p) {
  switch (p) {
    case FillPolicy::preferential: return "preferential";
    case FillPolicy::proportional: return "proportional";
    case FillPolicy::uniform: return "uniform";
  }
  return "?";
}

inline FillPolicy parse_fill_policy(std::string_view s) {
  if (s == "preferential") return FillPolicy::preferential;
  if (s == "proportional") return FillPolicy::proportional;
  if (s == "uniform") return FillPolicy::uniform;
  throw InvalidArgumentError("unknown fill policy '" + std::string(s) + "'");
}

struct GeneratorConfig {
  std::uint64_t servers = 1;
  std::uint64_t users = 1;
  std::uint64_t rooms = 1;
  DistributionSpec users_per_server = DistributionSpec::zipf(2.0);
  DistributionSpec rooms_per_user = DistributionSpec::zipf(2.5);
  DistributionSpec room_size = DistributionSpec::zipf(1.5);
  FillPolicy fill = FillPolicy::preferential;
  std::uint64_t seed = 0;

  void validate() const {
    if (servers < 1 || users < 1 || rooms < 1) {
      throw InvalidArgumentError("generator targets (servers, users, rooms) must all be >= 1");
    }
    users_per_server.validate("users_per_server");
    rooms_per_user.validate("rooms_per_user");
    room_size.validate("room_size");
    if (servers > users) {
      throw InfeasibleConfigError("every server needs a user: " + std::to_string(servers) + " servers > " +
                                  std::to_string(users) + " users");
    }
    if (rooms_per_user.min_value() > rooms) {
      throw InfeasibleConfigError("every user needs at least " + std::to_string(rooms_per_user.min_value()) +
                                  " rooms but only " + std::to_string(rooms) + " exist");
    }
  }

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

namespace detail {

class ZipfTable {
 public:
  ZipfTable(double exponent, std::uint64_t max) {
    cdf_.reserve(max);
    double acc = 0;
    for (std::uint64_t k = 1; k <= max; ++k) {
      acc += std::pow(static_cast<double>(k), -exponent);
      cdf_.push_back(acc);
    }
    for (auto& c : cdf_) c /= acc;
  }

  std::uint64_t operator()(Rng& rng) const {
    const double u = rng.unit();
    return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1;
  }

  double cdf(std::uint64_t x) const {
    if (x == 0) return 0;
    return x >= cdf_.size() ? 1.0 : cdf_[x - 1];
  }

 private:
  std::vector<double> cdf_;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Fenwick tree over non-negative weights, for weighted picks by prefix sum.
class WeightTree {
 public:
  explicit WeightTree(std::size_t n) : tree_(n + 1, 0.0), w_(n, 0.0) {
    while ((std::size_t{1} << log_) <= n) ++log_;
  }

  void set(std::size_t i, double w) {
    const double delta = w - w_[i];
    w_[i] = w;
    for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
  }
  double weight(std::size_t i) const { return w_[i]; }
  double total() const {
    double t = 0;
    for (std::size_t j = tree_.size() - 1; j > 0; j -= j & (~j + 1)) t += tree_[j];
    return t;
  }

  /// Index whose cumulative range contains `target` in [0, total).
  std::size_t find(double target) const {
    std::size_t pos = 0;
    for (std::size_t step = std::size_t{1} << log_; step > 0; step >>= 1) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    // Floating-point drift can land on a zero-weight slot; walk to a live one.
    std::size_t i = std::min(pos, w_.size() - 1);
    if (w_[i] > 0) return i;
    for (std::size_t j = i; j-- > 0;) {
      if (w_[j] > 0) return j;
    }
    for (std::size_t j = i + 1; j < w_.size(); ++j) {
      if (w_[j] > 0) return j;
    }
    return i;
  }

 private:
  std::vector<double> tree_;
  std::vector<double> w_;
  int log_ = 0;
};

}  // namespace detail

/// Draws `count` values. Empirical specs use balanced resampling: as many
/// full copies of the source multiset as fit, the remainder drawn without
/// replacement, then shuffled. With count equal to the source size this is
/// a permutation of the source values.
inline std::vector<std::uint64_t> draw(const DistributionSpec& spec, std::size_t count, std::uint64_t default_max,
                                       Rng& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(count);
  switch (spec.family) {
    case Family::empirical: {
      const auto& src = spec.values;
      while (out.size() + src.size() <= count) out.insert(out.end(), src.begin(), src.end());
      std::vector<std::uint64_t> pool = src;
      for (std::size_t j = 0; out.size() < count; ++j) {
        const std::size_t pick = j + rng.below(pool.size() - j);
        std::swap(pool[j], pool[pick]);
        out.push_back(pool[j]);
      }
      detail::shuffle(out, rng);
      break;
    }
    case Family::zipf: {
      const detail::ZipfTable table(spec.exponent, spec.max != 0 ? spec.max : std::max<std::uint64_t>(default_max, 1));
      for (std::size_t i = 0; i < count; ++i) out.push_back(table(rng));
      break;
    }
    case Family::lognormal: {
      for (std::size_t i = 0; i < count; ++i) {
        const double x = std::exp(spec.mu + spec.sigma * rng.normal());
        out.push_back(x >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                                  : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(x))));
      }
      break;
    }
  }
  return out;
}

namespace detail {

inline std::string padded(char prefix, std::uint64_t i, std::uint64_t n) {
  const std::size_t width = std::to_string(n == 0 ? 0 : n - 1).size();
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

// Adjusts per-server user counts to sum to exactly `users`: a deficit goes to
// the largest server, a surplus is taken from the largest servers down to one
// user each. Only a handful of entries change, so the shape is kept.
inline void match_total(std::vector<std::uint64_t>& counts, std::uint64_t users) {
  for (auto& c : counts) c = std::max<std::uint64_t>(c, 1);
  std::uint64_t sum = 0;
  for (auto c : counts) sum = std::min<std::uint64_t>(sum + c, std::numeric_limits<std::uint64_t>::max() / 2);
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  if (sum < users) {
    counts[order.front()] += users - sum;
    return;
  }
  std::uint64_t excess = sum - users;
  for (std::size_t i : order) {
    if (excess == 0) break;
    const std::uint64_t cut = std::min(excess, counts[i] - 1);
    counts[i] -= cut;
    excess -= cut;
  }
}

}  // namespace detail

/// Builds a structure from `config`:
///  1. draw users per server, then fix the user total (detail::match_total);
///  2. draw each user's room count, capped at the number of rooms;
///  3. draw a room attractiveness from room_size;
///  4. users, in random order, pick their rooms by weight (see FillPolicy),
///     distinct rooms per user.
/// Server participation is derived from the memberships, so the
/// tripartite invariants hold by construction. Ids are zero-padded so that
/// lexicographic order matches creation order.
inline NetworkStructure generate(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed, 0);

  auto per_server = draw(config.users_per_server, config.servers, config.users, rng);
  detail::match_total(per_server, config.users);

  auto rooms_per_user = draw(config.rooms_per_user, config.users, config.rooms, rng);
  for (auto& k : rooms_per_user) k = std::min(k, config.rooms);

  auto attractiveness = draw(config.room_size, config.rooms, config.users, rng);

  NetworkStructure s;
  std::vector<EntityId> server_ids, user_ids, room_ids;
  server_ids.reserve(config.servers);
  for (std::uint64_t i = 0; i < config.servers; ++i) {
    server_ids.emplace_back(detail::padded('s', i, config.servers));
    s.add_server(server_ids.back());
  }
  user_ids.reserve(config.users);
  {
    std::uint64_t u = 0;
    for (std::uint64_t srv = 0; srv < config.servers; ++srv) {
      for (std::uint64_t j = 0; j < per_server[srv]; ++j, ++u) {
        user_ids.emplace_back(detail::padded('u', u, config.users));
        s.users.emplace_hint(s.users.end(), user_ids.back(), server_ids[srv]);
      }
    }
  }
  room_ids.reserve(config.rooms);
  std::vector<IdSet> members(config.rooms);
  for (std::uint64_t r = 0; r < config.rooms; ++r) room_ids.emplace_back(detail::padded('r', r, config.rooms));

  auto base_weight = [&](std::size_t r, std::uint64_t size) -> double {
    switch (config.fill) {
      case FillPolicy::preferential: return static_cast<double>(size + std::max<std::uint64_t>(attractiveness[r], 1));
      case FillPolicy::proportional: return static_cast<double>(std::max<std::uint64_t>(attractiveness[r], 1));
      case FillPolicy::uniform: return 1.0;
    }
    return 1.0;
  };
  detail::WeightTree tree(config.rooms);
  std::vector<std::uint64_t> size(config.rooms, 0);
  for (std::size_t r = 0; r < config.rooms; ++r) tree.set(r, base_weight(r, 0));

  std::vector<std::size_t> user_order(config.users);
  std::iota(user_order.begin(), user_order.end(), std::size_t{0});
  detail::shuffle(user_order, rng);
  std::vector<std::size_t> picked;
  for (std::size_t u : user_order) {
    picked.clear();
    for (std::uint64_t j = 0; j < rooms_per_user[u]; ++j) {
      const double total = tree.total();
      if (!(total > 0)) break;
      const std::size_t r = tree.find(rng.unit() * total);
      picked.push_back(r);
      tree.set(r, 0.0);
    }
    for (std::size_t r : picked) {
      members[r].insert(user_ids[u]);
      ++size[r];
      tree.set(r, base_weight(r, size[r]));
    }
  }
  for (std::uint64_t r = 0; r < config.rooms; ++r) s.rooms.emplace_hint(s.rooms.end(), room_ids[r], std::move(members[r]));
  return s;
}

// ---------------------------------------------------------------------------
// Fitting

/// Two-sample Kolmogorov-Smirnov distance between the empirical CDFs.
inline double ks_distance(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
  if (a.empty() || b.empty()) throw InvalidArgumentError("KS distance needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const auto x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

struct ParametricFit {
  DistributionSpec spec;
  double log_likelihood = 0;
  double ks = 1;            // one-sample KS distance against the data
  bool degenerate = false;  // all observations equal: no meaningful fit
};

struct MarginalFit {
  DistributionSpec empirical;
  ParametricFit zipf;
  ParametricFit lognormal;
};

struct FitResult {
  GeneratorConfig config;  // empirical specs, source counts
  MarginalFit users_per_server;
  MarginalFit rooms_per_user;
  MarginalFit room_size;
};

namespace detail {

inline double empirical_cdf_gap(const std::vector<std::uint64_t>& sorted, auto model_cdf) {
  double d = 0;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    const auto x = sorted[i];
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - model_cdf(x - 1)));
    d = std::max(d, std::abs(static_cast<double>(j) / n - model_cdf(x)));
    i = j;
  }
  return d;
}

inline ParametricFit fit_zipf(const std::vector<std::uint64_t>& sorted_positive) {
  ParametricFit fit;
  const std::uint64_t xmax = sorted_positive.back();
  fit.degenerate = sorted_positive.front() == xmax;
  double sum_log = 0;
  for (auto x : sorted_positive) sum_log += std::log(static_cast<double>(x));
  const double n = static_cast<double>(sorted_positive.size());
  auto loglik = [&](double s) {
    double z = 0;
    for (std::uint64_t k = 1; k <= xmax; ++k) z += std::pow(static_cast<double>(k), -s);
    return -s * sum_log - n * std::log(z);
  };
  // The log-likelihood of this exponential family is concave in s.
  double lo = 0.0, hi = 8.0;
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = loglik(c), fd = loglik(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      hi = d; d = c; fd = fc;
      c = hi - g * (hi - lo); fc = loglik(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + g * (hi - lo); fd = loglik(d);
    }
  }
  const double s = (lo + hi) / 2;
  fit.spec = DistributionSpec::zipf(s, xmax);
  fit.log_likelihood = loglik(s);
  const ZipfTable table(s, xmax);
  fit.ks = empirical_cdf_gap(sorted_positive, [&](std::uint64_t x) { return table.cdf(x); });
  return fit;
}

inline ParametricFit fit_lognormal(const std::vector<std::uint64_t>& sorted_positive) {
  ParametricFit fit;
  const double n = static_cast<double>(sorted_positive.size());
  double mu = 0;
  for (auto x : sorted_positive) mu += std::log(static_cast<double>(x));
  mu /= n;
  double var = 0;
  for (auto x : sorted_positive) var += std::pow(std::log(static_cast<double>(x)) - mu, 2);
  const double sigma = std::sqrt(var / n);
  fit.degenerate = sigma == 0;
  fit.spec = DistributionSpec::lognormal(mu, sigma);
  auto cdf = [&](std::uint64_t x) {
    if (x == 0) return 0.0;
    if (sigma == 0) return std::log(x + 0.5) >= mu ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(std::log(x + 0.5) - mu) / (sigma * std::sqrt(2.0)));
  };
  if (!fit.degenerate) {
    double ll = 0;
    for (auto x : sorted_positive) {
      const double lx = std::log(static_cast<double>(x));
      ll += -lx - std::log(sigma * std::sqrt(2 * 3.141592653589793)) - (lx - mu) * (lx - mu) / (2 * sigma * sigma);
    }
    fit.log_likelihood = ll;
  }
  fit.ks = empirical_cdf_gap(sorted_positive, cdf);
  return fit;
}

inline MarginalFit fit_marginal(std::vector<std::uint64_t> values) {
  MarginalFit m;
  m.empirical = DistributionSpec::empirical(values);
  std::vector<std::uint64_t> positive;
  for (auto v : m.empirical.values) {
    if (v > 0) positive.push_back(v);
  }
  if (positive.empty()) {
    m.zipf.degenerate = m.lognormal.degenerate = true;
    return m;
  }
  m.zipf = fit_zipf(positive);
  m.lognormal = fit_lognormal(positive);
  return m;
}

}  // namespace detail

/// Extracts the three marginals of `idx`. The returned config resamples them
/// (empirical family) at the source's own counts; maximum-likelihood zipf and
/// lognormal fits are reported alongside with their KS distance.
inline FitResult fit(const StructureIndex& idx) {
  if (idx.server_count() < 2) {
    throw Error("degenerate-structure", "fitting needs at least two servers, got " +
                                            std::to_string(idx.server_count()));
  }
  if (idx.room_count() == 0) throw Error("degenerate-structure", "fitting needs at least one room");
  FitResult out;
  out.users_per_server = detail::fit_marginal(users_per_server(idx));
  out.rooms_per_user = detail::fit_marginal(rooms_per_user(idx));
  out.room_size = detail::fit_marginal(users_per_room(idx));
  out.config.servers = idx.server_count();
  out.config.users = idx.user_count();
  out.config.rooms = idx.room_count();
  out.config.users_per_server = out.users_per_server.empirical;
  out.config.rooms_per_user = out.rooms_per_user.empirical;
  out.config.room_size = out.room_size.empirical;
  return out;
}

inline FitResult fit(const NetworkStructure& s) { return fit(StructureIndex(s)); }

}  // namespace fedload
