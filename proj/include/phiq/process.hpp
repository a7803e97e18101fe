#ifndef PHIQ_PROCESS_HPP
#define PHIQ_PROCESS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "phiq/errors.hpp"
#include "phiq/format.hpp"
#include "phiq/kv.hpp"
#include "phiq/marginal.hpp"
#include "phiq/mixing.hpp"
#include "phiq/rng.hpp"

namespace phiq {

struct IidGenerator {};

/// values[i] = mean of uniforms i..i+m.
struct MDependentGenerator {
  std::size_t m = 1;
};

/// Latent uniform-stationary chain S_i; values[i] = F^{-1}((S_i + V_i) / K).
struct MarkovCopulaGenerator {
  TransitionMatrix transition;
};

using Generator = std::variant<IidGenerator, MDependentGenerator, MarkovCopulaGenerator>;

/// A stationary phi-mixing generator together with its marginal law and
/// mixing profile. Construct through the named factories, which enforce the
/// structural requirements of each generator.
class ProcessSpec {
 public:
  static ProcessSpec iid(MarginalModel marginal) {
    return ProcessSpec(IidGenerator{}, std::move(marginal), MixingProfile::zero());
  }

  static ProcessSpec m_dependent(std::size_t m) {
    if (m == 0) throw ArgumentError("m-dependent generator needs m >= 1; use the i.i.d. generator for m = 0");
    auto marginal = bates_marginal(static_cast<unsigned>(m + 1));
    return ProcessSpec(MDependentGenerator{m}, std::move(marginal), MixingProfile::m_dependent(m));
  }

  static ProcessSpec markov_copula(TransitionMatrix transition, MarginalModel marginal) {
    validate_uniform_ergodic(transition);
    // The observed values generate coarser sigma-fields than the latent chain,
    // so the chain's exact phi(n) is only an upper bound for them.
    auto mixing = phi_markov(transition).with_kind(MixingProfile::Kind::upper_bound);
    return ProcessSpec(MarkovCopulaGenerator{std::move(transition)}, std::move(marginal), std::move(mixing));
  }

  const Generator& generator() const noexcept { return generator_; }
  const MarginalModel& marginal() const noexcept { return marginal_; }
  const MixingProfile& mixing() const noexcept { return mixing_; }

  std::string kind_name() const {
    return std::visit(
        [](const auto& g) -> std::string {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, IidGenerator>) return "iid";
          if constexpr (std::is_same_v<G, MDependentGenerator>) return "m_dependent";
          if constexpr (std::is_same_v<G, MarkovCopulaGenerator>) return "markov_copula";
        },
        generator_);
  }

  /// Stable identifier, e.g. `iid[uniform]`, `m_dependent[m=2]`,
  /// `markov_copula[P=0.7,0.3;0.3,0.7|uniform]`.
  std::string id() const {
    return std::visit(
        [&](const auto& g) -> std::string {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, IidGenerator>) return "iid[" + marginal_.name + "]";
          if constexpr (std::is_same_v<G, MDependentGenerator>) return "m_dependent[m=" + std::to_string(g.m) + "]";
          if constexpr (std::is_same_v<G, MarkovCopulaGenerator>)
            return "markov_copula[P=" + g.transition.to_string() + "|" + marginal_.name + "]";
        },
        generator_);
  }

 private:
  ProcessSpec(Generator g, MarginalModel marginal, MixingProfile mixing)
      : generator_(std::move(g)), marginal_(std::move(marginal)), mixing_(std::move(mixing)) {}

  Generator generator_;
  MarginalModel marginal_;
  MixingProfile mixing_;
};

/// One simulated realization and the inputs that regenerate it.
struct SamplePath {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string spec_id;
  std::size_t n = 0;
};

namespace detail {
inline void require_count(std::size_t n) {
  if (n == 0) throw ArgumentError("path length n must be >= 1");
}
}  // namespace detail

inline SamplePath gen_iid(const MarginalModel& marginal, std::size_t n, std::uint64_t seed) {
  detail::require_count(n);
  Engine engine(seed);
  SamplePath path{std::vector<double>(n), seed, "iid[" + marginal.name + "]", n};
  for (auto& v : path.values) v = marginal.inv_cdf(uniform_open(engine));
  return path;
}

inline SamplePath gen_m_dependent(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (m == 0) throw ArgumentError("m-dependent generator needs m >= 1; use gen_iid for m = 0");
  detail::require_count(n);
  Engine engine(seed);
  std::vector<double> u(n + m);
  for (auto& x : u) x = uniform_open(engine);
  SamplePath path{std::vector<double>(n), seed, "m_dependent[m=" + std::to_string(m) + "]", n};
  const double width = static_cast<double>(m + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j <= m; ++j) sum += u[i + j];
    path.values[i] = sum / width;
  }
  return path;
}

inline SamplePath gen_markov_copula(const TransitionMatrix& transition, const MarginalModel& marginal,
                                    std::size_t n, std::uint64_t seed) {
  validate_uniform_ergodic(transition);
  detail::require_count(n);
  const std::size_t k = transition.states();
  const double kd = static_cast<double>(k);
  Engine engine(seed);
  SamplePath path{std::vector<double>(n), seed,
                  "markov_copula[P=" + transition.to_string() + "|" + marginal.name + "]", n};
  // Stationary start: S_0 uniform on the K states.
  auto state = std::min(k - 1, static_cast<std::size_t>(uniform_open(engine) * kd));
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double u = uniform_open(engine);
      double cumulative = 0.0;
      std::size_t next = k - 1;
      for (std::size_t j = 0; j < k; ++j) {
        cumulative += transition(state, j);
        if (u < cumulative) {
          next = j;
          break;
        }
      }
      state = next;
    }
    const double v = uniform_open(engine);
    // (S + V) / K lies strictly inside (0, 1) for V in (0, 1).
    const double u = std::clamp((static_cast<double>(state) + v) / kd, 0x1.0p-60, 1.0 - 0x1.0p-53);
    path.values[i] = marginal.inv_cdf(u);
  }
  return path;
}

/// Draws a path of length n; a pure function of (spec, n, seed).
inline SamplePath generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  auto path = std::visit(
      [&](const auto& g) -> SamplePath {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, IidGenerator>) return gen_iid(spec.marginal(), n, seed);
        if constexpr (std::is_same_v<G, MDependentGenerator>) return gen_m_dependent(g.m, n, seed);
        if constexpr (std::is_same_v<G, MarkovCopulaGenerator>)
          return gen_markov_copula(g.transition, spec.marginal(), n, seed);
      },
      spec.generator());
  path.spec_id = spec.id();
  return path;
}

// Key-value schema (see docs/config.md):
//   generator  = iid | m_dependent | markov_copula
//   marginal   = uniform | exponential[:rate] | normal[:mean:sd] | bates:k   (iid, markov_copula)
//   m          = positive integer                                  (m_dependent)
//   transition = rows separated by ';', entries by ','             (markov_copula)
//   seed       = unsigned 64-bit integer (optional)

inline ProcessSpec process_spec_from(const KeyValues& kv) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw SpecError("missing key '" + key + "'");
    return it->second;
  };
  const auto& kind = get("generator");
  if (kind == "iid") return ProcessSpec::iid(make_marginal(get("marginal")));
  if (kind == "m_dependent") {
    const double m = parse_double(get("m"), "m");
    if (m < 1 || m != std::floor(m)) throw SpecError("m must be a positive integer");
    return ProcessSpec::m_dependent(static_cast<std::size_t>(m));
  }
  if (kind == "markov_copula") {
    auto it = kv.find("marginal");
    return ProcessSpec::markov_copula(TransitionMatrix::parse(get("transition")),
                                      make_marginal(it == kv.end() ? "uniform" : it->second));
  }
  throw SpecError("unknown generator '" + kind + "'");
}

inline KeyValues to_key_values(const ProcessSpec& spec) {
  KeyValues kv;
  kv["generator"] = spec.kind_name();
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, IidGenerator>) kv["marginal"] = spec.marginal().name;
        if constexpr (std::is_same_v<G, MDependentGenerator>) kv["m"] = std::to_string(g.m);
        if constexpr (std::is_same_v<G, MarkovCopulaGenerator>) {
          kv["marginal"] = spec.marginal().name;
          kv["transition"] = g.transition.to_string();
        }
      },
      spec.generator());
  return kv;
}

inline ProcessSpec read_process_spec(std::istream& in) { return process_spec_from(read_key_values(in)); }

inline void write_process_spec(std::ostream& out, const ProcessSpec& spec,
                               std::optional<std::uint64_t> seed = std::nullopt) {
  for (const auto& [key, value] : to_key_values(spec)) out << key << " = " << value << '\n';
  if (seed) out << "seed = " << *seed << '\n';
}

/// One value per line after a `# spec_id=...;seed=...;n=...` line and a
/// `value` column header.
inline void write_path_csv(std::ostream& out, const SamplePath& path) {
  out << "# spec_id=" << path.spec_id << ";seed=" << path.seed << ";n=" << path.n << '\n';
  out << "value\n";
  for (double v : path.values) out << sig17(v) << '\n';
}

}  // namespace phiq

#endif  // PHIQ_PROCESS_HPP
