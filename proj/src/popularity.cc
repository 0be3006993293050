#include "hitrate/popularity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <variant>

#include "hitrate/errors.h"
#include "summation.h"

namespace hitrate {

namespace detail {

struct ZipfParams {
  double alpha;
};
struct GeometricParams {
  double rho;
};
struct UniformParams {};
struct ExplicitParams {
  std::vector<double> weights;
};
struct MixtureParams {
  std::vector<MixtureComponent> components;
  // offsets[i] is the number of ranks before component i; offsets.back() is
  // the population.
  std::vector<std::uint64_t> offsets;
  // Per-chunk scale share_i / (mass_i * chunks_i).
  std::vector<double> scale;
};
struct FilteredParams {
  PopularityLaw base;
  HitProfile hits;
  // Tabulated filters only: surviving base ranks and their filtered weights.
  std::vector<std::uint64_t> survivors;
  std::vector<double> weights;
};

struct LawNode {
  LawKind kind;
  std::uint64_t population = 0;
  bool monotone = false;
  double mass = 0.0;
  std::variant<ZipfParams, GeometricParams, UniformParams, ExplicitParams,
               MixtureParams, FilteredParams>
      params;
};

}  // namespace detail

const detail::LawNode& node_of(const PopularityLaw& law) { return *law.node_; }

namespace {

using detail::LawNode;

bool nonincreasing(std::span<const double> w) {
  return std::adjacent_find(w.begin(), w.end(), std::less<>()) == w.end();
}

double compensated_total(std::span<const double> w) {
  internal::CompensatedSum s;
  for (double x : w) s += x;
  return s.value();
}

// Survival factor 1 - h(q) of a model hit profile.
double model_survival(const HitProfile& hits, double q) {
  switch (hits.model) {
    case HitProfile::Model::kCharacteristicTime:
      return std::exp(-q * hits.parameter);
    case HitProfile::Model::kRandomFixedPoint: {
      const double rest = hits.total_mass - q;
      return rest / (rest + q * hits.parameter);
    }
    case HitProfile::Model::kSaturated:
      return 0.0;
    case HitProfile::Model::kTabulated:
      break;
  }
  throw DomainError("tabulated profile has no weight-based survival");
}

// Emits item-level segments of `law` mapped into an enclosing universe:
// item ranks [a, b] become ranks offset + (a-1)*mult + 1 .. offset + b*mult,
// weights are multiplied by `scale`.
class SegmentEmitter {
 public:
  SegmentEmitter(double epsilon, const std::function<void(const Segment&)>& fn)
      : eps_(epsilon), fn_(fn) {}

  void run(const PopularityLaw& law, std::uint64_t offset, std::uint64_t mult,
           double scale) const {
    const LawNode& node = node_of(law);
    auto emit = [&](std::uint64_t a, std::uint64_t b, double qa, double qb,
                    double qr) {
      fn_(Segment{offset + (a - 1) * mult + 1, offset + b * mult, qa * scale,
                  qb * scale, qr * scale});
    };
    const std::uint64_t n = node.population;
    switch (node.kind) {
      case LawKind::kUniform:
        if (n > 0) emit(1, n, 1.0, 1.0, 1.0);
        return;
      case LawKind::kZipf:
        zipf(std::get<detail::ZipfParams>(node.params).alpha, n, emit);
        return;
      case LawKind::kGeometric:
        geometric(std::get<detail::GeometricParams>(node.params).rho, n, emit);
        return;
      case LawKind::kExplicit:
        table(std::get<detail::ExplicitParams>(node.params).weights,
              node.monotone, emit);
        return;
      case LawKind::kMixture: {
        const auto& mix = std::get<detail::MixtureParams>(node.params);
        for (std::size_t i = 0; i < mix.components.size(); ++i) {
          run(mix.components[i].law, offset + mix.offsets[i] * mult,
              mult * mix.components[i].chunks_per_item, scale * mix.scale[i]);
        }
        return;
      }
      case LawKind::kFiltered: {
        const auto& f = std::get<detail::FilteredParams>(node.params);
        if (f.hits.model == HitProfile::Model::kTabulated) {
          table(f.weights, node.monotone, emit);
        } else if (f.hits.model != HitProfile::Model::kSaturated) {
          filtered(f, emit);
        }
        return;
      }
    }
  }

 private:
  template <typename Emit>
  void zipf(double alpha, std::uint64_t n, Emit& emit) const {
    const double growth = std::pow(1.0 + eps_, 1.0 / alpha);
    const double bound = 1.0 + eps_;
    std::uint64_t a = 1;
    while (a <= n) {
      const double qa = std::pow(static_cast<double>(a), -alpha);
      double reach = std::floor(static_cast<double>(a) * growth);
      std::uint64_t b = reach >= static_cast<double>(n)
                            ? n
                            : std::max(a, static_cast<std::uint64_t>(reach));
      if (b == a) {
        emit(a, a, qa, qa, qa);
        ++a;
        continue;
      }
      double qb = std::pow(static_cast<double>(b), -alpha);
      while (b > a && qa > bound * qb) {
        --b;
        qb = std::pow(static_cast<double>(b), -alpha);
      }
      const double mid = 0.5 * (static_cast<double>(a) + static_cast<double>(b));
      emit(a, b, qa, qb, std::pow(mid, -alpha));
      a = b + 1;
    }
  }

  template <typename Emit>
  void geometric(double rho, std::uint64_t n, Emit& emit) const {
    const double log_rho = std::log(rho);
    const double bound = 1.0 + eps_;
    const auto width = static_cast<std::uint64_t>(
        std::max(0.0, std::floor(std::log1p(eps_) / -log_rho)));
    std::uint64_t a = 1;
    while (a <= n) {
      std::uint64_t b = std::min(n, a + width);
      const double qa = std::exp(static_cast<double>(a) * log_rho);
      double qb = std::exp(static_cast<double>(b) * log_rho);
      while (b > a && qa > bound * qb) {
        --b;
        qb = std::exp(static_cast<double>(b) * log_rho);
      }
      const double mid = 0.5 * (static_cast<double>(a) + static_cast<double>(b));
      emit(a, b, qa, qb, b == a ? qa : std::exp(mid * log_rho));
      a = b + 1;
    }
  }

  // Tables are grouped only when sorted; the representative is the exact
  // group mean so bucketed mass equals the true mass.
  template <typename Emit>
  void table(const std::vector<double>& w, bool sorted, Emit& emit) const {
    const std::size_t n = w.size();
    if (!sorted) {
      for (std::size_t i = 0; i < n; ++i) emit(i + 1, i + 1, w[i], w[i], w[i]);
      return;
    }
    const double bound = 1.0 + eps_;
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      internal::CompensatedSum sum;
      sum += w[i];
      while (j + 1 < n && w[i] <= bound * w[j + 1]) {
        ++j;
        sum += w[j];
      }
      emit(i + 1, j + 1, w[i], w[j],
           j == i ? w[i] : sum.value() / static_cast<double>(j - i + 1));
      i = j + 1;
    }
  }

  // Base segments of a model-filtered law, bisected until the filtered
  // endpoint weights are within the ratio bound.
  template <typename Emit>
  void filtered(const detail::FilteredParams& f, Emit& emit) const {
    const double bound = 1.0 + eps_;
    auto out = [&](auto&& self, std::uint64_t a, std::uint64_t b, double qa,
                   double qb, double qr) -> void {
      const double fa = qa * model_survival(f.hits, qa);
      const double fb = qb * model_survival(f.hits, qb);
      const double hi = std::max(fa, fb);
      const double lo = std::min(fa, fb);
      if (a == b || hi <= bound * lo || hi == 0.0) {
        emit(a, b, fa, fb, qr * model_survival(f.hits, qr));
        return;
      }
      const std::uint64_t m = a + (b - a) / 2;
      const double qm = f.base.weight(m);
      const double qm1 = f.base.weight(m + 1);
      self(self, a, m, qa, qm, m == a ? qa : std::sqrt(qa * qm));
      self(self, m + 1, b, qm1, qb, m + 1 == b ? qb : std::sqrt(qm1 * qb));
    };
    SegmentEmitter(eps_, [&](const Segment& s) {
      out(out, s.first, s.last, s.q_first, s.q_last, s.q_rep);
    }).run(f.base, 0, 1, 1.0);
  }

  double eps_;
  const std::function<void(const Segment&)>& fn_;
};

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
    throw ValidationError("population overflows 64-bit rank space");
  }
  return a * b;
}

}  // namespace

const char* to_string(LawKind kind) {
  switch (kind) {
    case LawKind::kZipf:
      return "zipf";
    case LawKind::kGeometric:
      return "geometric";
    case LawKind::kUniform:
      return "uniform";
    case LawKind::kExplicit:
      return "explicit";
    case LawKind::kMixture:
      return "mixture";
    case LawKind::kFiltered:
      return "filtered";
  }
  return "unknown";
}

PopularityLaw::PopularityLaw(std::shared_ptr<const detail::LawNode> node)
    : node_(std::move(node)) {}

PopularityLaw PopularityLaw::zipf(double alpha, std::uint64_t population) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("zipf exponent must be positive");
  }
  if (population == 0) throw DomainError("population must be positive");
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kZipf;
  node->population = population;
  node->monotone = true;
  node->mass = zipf_partial_sum(alpha, population);
  node->params = detail::ZipfParams{alpha};
  return PopularityLaw(std::move(node));
}

PopularityLaw PopularityLaw::geometric(double rho, std::uint64_t population) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("geometric ratio must lie in (0, 1)");
  }
  if (population == 0) throw DomainError("population must be positive");
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kGeometric;
  node->population = population;
  node->monotone = true;
  // rho (1 - rho^N) / (1 - rho)
  node->mass = rho * -std::expm1(static_cast<double>(population) * std::log(rho)) /
               (1.0 - rho);
  node->params = detail::GeometricParams{rho};
  return PopularityLaw(std::move(node));
}

PopularityLaw PopularityLaw::uniform(std::uint64_t population) {
  if (population == 0) throw DomainError("population must be positive");
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kUniform;
  node->population = population;
  node->monotone = true;
  node->mass = static_cast<double>(population);
  node->params = detail::UniformParams{};
  return PopularityLaw(std::move(node));
}

PopularityLaw PopularityLaw::explicit_weights(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("explicit law needs at least one weight");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError("explicit weights must be positive and finite");
    }
  }
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kExplicit;
  node->population = weights.size();
  node->monotone = nonincreasing(weights);
  node->mass = compensated_total(weights);
  node->params = detail::ExplicitParams{std::move(weights)};
  return PopularityLaw(std::move(node));
}

PopularityLaw PopularityLaw::mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  detail::MixtureParams params;
  params.offsets.push_back(0);
  double total = 0.0;
  bool monotone = true;
  for (const MixtureComponent& c : components) {
    if (!(c.share > 0.0) || !std::isfinite(c.share)) {
      throw DomainError("mixture shares must be positive");
    }
    if (c.chunks_per_item == 0) throw DomainError("chunk count must be positive");
    if (!c.law.node_ || c.law.population() == 0) {
      throw DomainError("mixture component is empty");
    }
    const std::uint64_t ranks = checked_mul(c.law.population(), c.chunks_per_item);
    if (params.offsets.back() > std::numeric_limits<std::uint64_t>::max() - ranks) {
      throw ValidationError("population overflows 64-bit rank space");
    }
    params.offsets.push_back(params.offsets.back() + ranks);
    params.scale.push_back(c.share /
                           (c.law.mass() * static_cast<double>(c.chunks_per_item)));
    total += c.share;
    monotone = monotone && c.law.monotone();
  }
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kMixture;
  node->population = params.offsets.back();
  node->monotone = monotone;
  node->mass = total;
  params.components = std::move(components);
  node->params = std::move(params);
  return PopularityLaw(std::move(node));
}

PopularityLaw PopularityLaw::filtered(PopularityLaw base, HitProfile hits) {
  if (!base.node_) throw DomainError("filtered law needs a base law");
  if (hits.population != base.population()) {
    throw DomainError("hit profile universe (" + std::to_string(hits.population) +
                      ") differs from law population (" +
                      std::to_string(base.population()) + ")");
  }
  detail::FilteredParams params{std::move(base), std::move(hits), {}, {}};
  auto node = std::make_shared<LawNode>();
  node->kind = LawKind::kFiltered;
  const PopularityLaw& b = params.base;
  const HitProfile& h = params.hits;
  switch (h.model) {
    case HitProfile::Model::kTabulated: {
      if (h.tabulated.size() != b.population()) {
        throw DomainError("tabulated hit profile does not cover the universe");
      }
      for (std::uint64_t r = 1; r <= b.population(); ++r) {
        const double hit = h.tabulated[r - 1];
        if (!(hit >= 0.0 && hit <= 1.0)) {
          throw DomainError("hit rates must lie in [0, 1]");
        }
        if (hit < 1.0) {
          params.survivors.push_back(r);
          params.weights.push_back(b.weight(r) * (1.0 - hit));
        }
      }
      node->population = params.survivors.size();
      node->monotone = nonincreasing(params.weights);
      node->mass = compensated_total(params.weights);
      break;
    }
    case HitProfile::Model::kSaturated:
      node->population = 0;
      node->monotone = true;
      node->mass = 0.0;
      break;
    case HitProfile::Model::kCharacteristicTime:
    case HitProfile::Model::kRandomFixedPoint:
      node->population = b.population();
      node->monotone = false;
      break;
  }
  const bool bucketed_mass = !node->monotone && params.survivors.empty() &&
                             node->population > 0 &&
                             h.model != HitProfile::Model::kTabulated;
  node->params = std::move(params);
  if (bucketed_mass) {
    node->mass = total_mass(PopularityLaw(node), kDefaultEpsilon);
  }
  return PopularityLaw(std::move(node));
}

LawKind PopularityLaw::kind() const { return node_->kind; }
std::uint64_t PopularityLaw::population() const { return node_->population; }
bool PopularityLaw::monotone() const { return node_->monotone; }
double PopularityLaw::mass() const { return node_->mass; }

double PopularityLaw::weight(std::uint64_t rank) const {
  const LawNode& node = *node_;
  if (rank < 1 || rank > node.population) {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(node.population) + "]");
  }
  switch (node.kind) {
    case LawKind::kZipf:
      return std::pow(static_cast<double>(rank),
                      -std::get<detail::ZipfParams>(node.params).alpha);
    case LawKind::kGeometric:
      return std::exp(static_cast<double>(rank) *
                      std::log(std::get<detail::GeometricParams>(node.params).rho));
    case LawKind::kUniform:
      return 1.0;
    case LawKind::kExplicit:
      return std::get<detail::ExplicitParams>(node.params).weights[rank - 1];
    case LawKind::kMixture: {
      const auto& mix = std::get<detail::MixtureParams>(node.params);
      const auto it = std::upper_bound(mix.offsets.begin(), mix.offsets.end(),
                                       rank - 1);
      const std::size_t i = static_cast<std::size_t>(it - mix.offsets.begin()) - 1;
      const std::uint64_t local = rank - 1 - mix.offsets[i];
      const std::uint64_t item = local / mix.components[i].chunks_per_item + 1;
      return mix.scale[i] * mix.components[i].law.weight(item);
    }
    case LawKind::kFiltered: {
      const auto& f = std::get<detail::FilteredParams>(node.params);
      if (f.hits.model == HitProfile::Model::kTabulated) return f.weights[rank - 1];
      const double q = f.base.weight(rank);
      return q * model_survival(f.hits, q);
    }
  }
  return 0.0;
}

double PopularityLaw::weight_at(double rank) const {
  switch (node_->kind) {
    case LawKind::kZipf:
      return std::pow(rank, -std::get<detail::ZipfParams>(node_->params).alpha);
    case LawKind::kGeometric:
      return std::exp(rank *
                      std::log(std::get<detail::GeometricParams>(node_->params).rho));
    case LawKind::kUniform:
      return 1.0;
    default:
      break;
  }
  const double clamped =
      std::clamp(std::round(rank), 1.0, static_cast<double>(population()));
  return weight(static_cast<std::uint64_t>(clamped));
}

double PopularityLaw::alpha() const {
  if (node_->kind != LawKind::kZipf) throw DomainError("not a zipf law");
  return std::get<detail::ZipfParams>(node_->params).alpha;
}

double PopularityLaw::rho() const {
  if (node_->kind != LawKind::kGeometric) throw DomainError("not a geometric law");
  return std::get<detail::GeometricParams>(node_->params).rho;
}

std::span<const double> PopularityLaw::explicit_values() const {
  if (node_->kind != LawKind::kExplicit) throw DomainError("not an explicit law");
  return std::get<detail::ExplicitParams>(node_->params).weights;
}

const std::vector<MixtureComponent>& PopularityLaw::components() const {
  if (node_->kind != LawKind::kMixture) throw DomainError("not a mixture");
  return std::get<detail::MixtureParams>(node_->params).components;
}

const PopularityLaw& PopularityLaw::base() const {
  if (node_->kind != LawKind::kFiltered) throw DomainError("not a filtered law");
  return std::get<detail::FilteredParams>(node_->params).base;
}

const HitProfile& PopularityLaw::hits() const {
  if (node_->kind != LawKind::kFiltered) throw DomainError("not a filtered law");
  return std::get<detail::FilteredParams>(node_->params).hits;
}

std::span<const std::uint64_t> PopularityLaw::survivor_ranks() const {
  if (node_->kind != LawKind::kFiltered) throw DomainError("not a filtered law");
  return std::get<detail::FilteredParams>(node_->params).survivors;
}

std::string PopularityLaw::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << "(";
  switch (kind()) {
    case LawKind::kZipf:
      os << "alpha=" << alpha() << ", ";
      break;
    case LawKind::kGeometric:
      os << "rho=" << rho() << ", ";
      break;
    case LawKind::kMixture:
      os << components().size() << " components, ";
      break;
    default:
      break;
  }
  os << "N=" << population() << ")";
  return os.str();
}

void TrafficMix::validate() const {
  if (types.empty()) throw ValidationError("traffic mix: types list is empty");
  double total = 0.0;
  for (const ContentType& t : types) {
    const std::string where = "traffic mix type '" + t.name + "': ";
    if (!(t.share > 0.0 && t.share <= 1.0)) {
      throw ValidationError(where + "share must lie in (0, 1]");
    }
    if (t.population == 0) throw ValidationError(where + "population must be positive");
    if (t.chunk_count == 0) throw ValidationError(where + "chunk_count must be positive");
    if (!(t.zipf_alpha > 0.0)) throw ValidationError(where + "zipf_alpha must be positive");
    total += t.share;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ValidationError("traffic mix: shares sum to " + std::to_string(total) +
                          ", expected 1");
  }
}

std::uint64_t TrafficMix::total_chunks() const {
  std::uint64_t total = 0;
  for (const ContentType& t : types) total += checked_mul(t.population, t.chunk_count);
  return total;
}

TrafficMix internet_traffic_mix() {
  return TrafficMix{{
      {"web", 0.18, 100'000'000'000ULL, 10, 0.8},
      {"file_sharing", 0.36, 100'000ULL, 1'000'000, 0.8},
      {"ugc", 0.23, 100'000'000ULL, 1'000, 0.8},
      {"vod", 0.23, 10'000ULL, 10'000, 1.2},
  }};
}

PopularityLaw build_mix_law(const TrafficMix& mix) {
  mix.validate();
  std::vector<MixtureComponent> components;
  components.reserve(mix.types.size());
  for (const ContentType& t : mix.types) {
    components.push_back(
        {t.share, PopularityLaw::zipf(t.zipf_alpha, t.population), t.chunk_count});
  }
  return PopularityLaw::mixture(std::move(components));
}

double mix_chunk_weight(const TrafficMix& mix, std::size_t type,
                        std::uint64_t object) {
  if (type >= mix.types.size()) throw DomainError("content type index out of range");
  const ContentType& t = mix.types[type];
  if (object < 1 || object > t.population) throw DomainError("object rank out of range");
  const double norm = static_cast<double>(t.chunk_count) *
                      zipf_partial_sum(t.zipf_alpha, t.population);
  return t.share * std::pow(static_cast<double>(object), -t.zipf_alpha) / norm;
}

PopularityLaw filter_law(const PopularityLaw& law, const HitProfile& hits) {
  return PopularityLaw::filtered(law, hits);
}

double zipf_partial_sum(double alpha, std::uint64_t count) {
  constexpr std::uint64_t kDirect = 1 << 16;
  if (count <= kDirect) {
    internal::CompensatedSum s;
    for (std::uint64_t n = count; n >= 1; --n) {
      s += std::pow(static_cast<double>(n), -alpha);
    }
    return s.value();
  }
  internal::CompensatedSum s;
  for (std::uint64_t n = kDirect - 1; n >= 1; --n) {
    s += std::pow(static_cast<double>(n), -alpha);
  }
  // Euler-Maclaurin for sum_{n=M}^{K} n^-alpha.
  const double m = static_cast<double>(kDirect);
  const double k = static_cast<double>(count);
  const double log_ratio = std::log(k / m);
  const double one_minus = 1.0 - alpha;
  const double integral =
      std::fabs(one_minus) < 1e-300
          ? log_ratio
          : std::pow(m, one_minus) * std::expm1(one_minus * log_ratio) / one_minus;
  auto f = [&](double x) { return std::pow(x, -alpha); };
  auto d1 = [&](double x) { return -alpha * std::pow(x, -alpha - 1.0); };
  auto d3 = [&](double x) {
    return -alpha * (alpha + 1.0) * (alpha + 2.0) * std::pow(x, -alpha - 3.0);
  };
  auto d5 = [&](double x) {
    return -alpha * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) * (alpha + 4.0) *
           std::pow(x, -alpha - 5.0);
  };
  const double tail = integral + 0.5 * (f(m) + f(k)) + (d1(k) - d1(m)) / 12.0 -
                      (d3(k) - d3(m)) / 720.0 + (d5(k) - d5(m)) / 30240.0;
  s += tail;
  return s.value();
}

void for_each_segment(const PopularityLaw& law, double epsilon,
                      const std::function<void(const Segment&)>& fn) {
  if (!(epsilon > 0.0)) throw DomainError("grouping tolerance must be positive");
  SegmentEmitter(epsilon, fn).run(law, 0, 1, 1.0);
}

RankSegmentation segment(const PopularityLaw& law, double epsilon) {
  RankSegmentation out;
  for_each_segment(law, epsilon, [&](const Segment& s) {
    out.breakpoints.push_back(s.first);
    out.q_lo.push_back(std::min(s.q_first, s.q_last));
    out.q_hi.push_back(std::max(s.q_first, s.q_last));
    out.q_rep.push_back(s.q_rep);
  });
  out.breakpoints.push_back(law.population() + 1);
  return out;
}

double total_mass(const PopularityLaw& law, double epsilon) {
  internal::CompensatedSum s;
  for_each_segment(law, epsilon, [&](const Segment& seg) {
    s += static_cast<double>(seg.last - seg.first + 1) * seg.q_rep;
  });
  return s.value();
}

}  // namespace hitrate
