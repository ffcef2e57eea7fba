#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dagsim/error.hpp"

namespace dagsim::game {

/// Exact rational with 64-bit numerator and positive denominator, always in
/// lowest terms. Arithmetic goes through 128-bit intermediates and throws on
/// overflow rather than wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  // Nearest rational within `tolerance` (relative for |x| > 1), by continued fractions.
  static Rational from_double(double x, double tolerance = 1e-9) {
    if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "payoff must be finite");
    const double tol = tolerance * std::max(1.0, std::fabs(x));
    __int128 h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double rest = x;
    constexpr double limit = 9.0e18;
    for (int i = 0; i < 64; ++i) {
      const double a = std::floor(rest);
      if (std::fabs(a) > limit) break;
      const auto ai = static_cast<__int128>(a);
      const __int128 h2 = ai * h1 + h0;
      const __int128 k2 = ai * k1 + k0;
      if (h2 > static_cast<__int128>(limit) || h2 < -static_cast<__int128>(limit) || k2 > static_cast<__int128>(limit)) break;
      h0 = h1, h1 = h2, k0 = k1, k1 = k2;
      if (std::fabs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) break;
      const double frac = rest - a;
      if (frac == 0.0) break;
      rest = 1.0 / frac;
    }
    if (k1 == 0) throw Error(Errc::InvalidArgument, "payoff out of range");
    return Rational(static_cast<std::int64_t>(h1), static_cast<std::int64_t>(k1));
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return make(static_cast<__int128>(x.num_) * y.den_ + static_cast<__int128>(y.num_) * x.den_,
                static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return make(static_cast<__int128>(x.num_) * y.den_ - static_cast<__int128>(y.num_) * x.den_,
                static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return make(static_cast<__int128>(x.num_) * y.num_, static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    if (y.num_ == 0) throw Error(Errc::InvalidArgument, "division by zero");
    return make(static_cast<__int128>(x.num_) * y.den_, static_cast<__int128>(x.den_) * y.num_);
  }
  friend Rational operator-(const Rational& x) { return make(-static_cast<__int128>(x.num_), x.den_); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& x, const Rational& y) {
    return static_cast<__int128>(x.num_) * y.den_ <=> static_cast<__int128>(y.num_) * x.den_;
  }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational make(__int128 n, __int128 d) {
    if (d == 0) throw Error(Errc::InvalidArgument, "zero denominator");
    if (d < 0) n = -n, d = -d;
    const __int128 g = gcd128(n, d);
    if (g > 1) n /= g, d /= g;
    constexpr auto hi = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
    if (n > hi || n < -hi || d > hi) throw Error(Errc::InvalidArgument, "rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::ostream& operator<<(std::ostream& out, const Rational& r) { return out << r.str(); }

enum class Move { H, G };

inline char to_char(Move m) { return m == Move::H ? 'H' : 'G'; }

/// Symmetric 2x2 game. a = U(H,H), b = U(H,G), c = U(G,H), d = U(G,G), each
/// from the row player's point of view.
struct BaseGame {
  Rational a, b, c, d;

  static BaseGame from_doubles(double a, double b, double c, double d, double tolerance = 1e-9) {
    return {Rational::from_double(a, tolerance), Rational::from_double(b, tolerance), Rational::from_double(c, tolerance),
            Rational::from_double(d, tolerance)};
  }

  const Rational& payoff(Move own, Move other) const noexcept {
    if (own == Move::H) return other == Move::H ? a : b;
    return other == Move::H ? c : d;
  }
};

enum class Scenario { S1, S2, S3, S4, S5, Unclassified };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    case Scenario::S4: return "S4";
    case Scenario::S5: return "S5";
    case Scenario::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

inline Scenario classify(const BaseGame& g) {
  const auto& [a, b, c, d] = g;
  if (a == d && c > a && c > b) return Scenario::S5;
  if (d > c && c > a && a > b) return Scenario::S1;
  if (c > d && d > a && a > b) return Scenario::S2;
  if (c > a && a > d && d > b) return Scenario::S3;
  if (c > a && a > b && b > d) return Scenario::S4;
  return Scenario::Unclassified;
}

struct Profile {
  Move row, col;
  friend bool operator==(const Profile&, const Profile&) = default;
};

inline std::string to_string(const Profile& p) { return std::string("(") + to_char(p.row) + "," + to_char(p.col) + ")"; }

// Weak pure equilibria, in the order (H,H), (H,G), (G,H), (G,G).
inline std::vector<Profile> pure_nash(const BaseGame& g) {
  auto other = [](Move m) { return m == Move::H ? Move::G : Move::H; };
  std::vector<Profile> out;
  for (Move r : {Move::H, Move::G})
    for (Move c : {Move::H, Move::G}) {
      const bool row_ok = g.payoff(r, c) >= g.payoff(other(r), c);
      const bool col_ok = g.payoff(c, r) >= g.payoff(other(c), r);
      if (row_ok && col_ok) out.push_back({r, c});
    }
  return out;
}

inline bool strictly_dominates(const BaseGame& g, Move s) {
  if (s == Move::G) return g.c > g.a && g.d > g.b;
  return g.a > g.c && g.b > g.d;
}

struct MixedEquilibrium {
  Rational p_h;     // probability each player puts on H
  Rational payoff;  // expected payoff of each player
};

inline std::optional<MixedEquilibrium> mixed_nash_2x2(const BaseGame& g) {
  const Rational denom = (g.a - g.c) + (g.d - g.b);
  if (denom == Rational(0)) return std::nullopt;
  const Rational p = (g.d - g.b) / denom;
  if (!(p > Rational(0) && p < Rational(1))) return std::nullopt;
  return MixedEquilibrium{p, p * g.a + (Rational(1) - p) * g.b};
}

enum class Response { H, G, Indifferent };

inline std::string to_string(Response r) {
  switch (r) {
    case Response::H: return "H";
    case Response::G: return "G";
    case Response::Indifferent: return "indifferent";
  }
  return "indifferent";
}

inline Response best_response_to_mixed(const BaseGame& g, const Rational& opponent_p_h) {
  if (opponent_p_h < Rational(0) || opponent_p_h > Rational(1))
    throw Error(Errc::InvalidArgument, "opponent probability must lie in [0, 1]");
  const Rational q = Rational(1) - opponent_p_h;
  const Rational h = opponent_p_h * g.a + q * g.b;
  const Rational gr = opponent_p_h * g.c + q * g.d;
  if (h > gr) return Response::H;
  if (gr > h) return Response::G;
  return Response::Indifferent;
}

inline Response best_response_to_mixed(const BaseGame& g, double opponent_p_h) {
  return best_response_to_mixed(g, Rational::from_double(opponent_p_h));
}

/// Smallest discount factor sustaining (H,H) under grim trigger: (c-a)/(c-d).
inline Rational min_discount_factor(const BaseGame& g) {
  if (!(g.c > g.d)) throw Error(Errc::InvalidArgument, "discount threshold undefined unless c > d");
  return (g.c - g.a) / (g.c - g.d);
}

inline void check_discount(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(Errc::InvalidArgument, "discount factor must lie in [0, 1)");
}

inline double discounted_payoff(const std::vector<double>& stream, double delta) {
  check_discount(delta);
  double sum = 0.0;
  double weight = 1.0;
  for (double u : stream) {
    sum += weight * u;
    weight *= delta;
  }
  return sum;
}

enum class GrimChoice { Comply, Deviate };

inline std::string to_string(GrimChoice c) { return c == GrimChoice::Comply ? "comply" : "deviate"; }

/// Perpetual (H,H) against one deviation followed by punishment at d, both
/// summed over `horizon` rounds. Compliance wins ties.
inline GrimChoice grim_trigger_compare(const BaseGame& g, double delta, std::uint64_t horizon) {
  check_discount(delta);
  if (horizon == 0) throw Error(Errc::InvalidArgument, "horizon must be positive");
  if (!(g.c > g.d)) throw Error(Errc::InvalidArgument, "grim trigger needs c > d");
  const double a = g.a.to_double(), c = g.c.to_double(), d = g.d.to_double();
  // sum_{t=1}^{H-1} delta^t
  const double tail = delta == 0.0 ? 0.0 : delta * (1.0 - std::pow(delta, static_cast<double>(horizon - 1))) / (1.0 - delta);
  return (a - c) + (a - d) * tail >= 0.0 ? GrimChoice::Comply : GrimChoice::Deviate;
}

/// Key/value report printed by the `game` subcommand.
inline std::string describe(const BaseGame& g) {
  std::ostringstream out;
  out << "payoffs: a=" << g.a << " b=" << g.b << " c=" << g.c << " d=" << g.d << '\n';
  out << "scenario: " << to_string(classify(g)) << '\n';
  const auto pne = pure_nash(g);
  out << "pne: ";
  if (pne.empty()) out << "none";
  for (std::size_t i = 0; i < pne.size(); ++i) out << (i ? " " : "") << to_string(pne[i]);
  out << '\n';
  out << "g_dominates_h: " << (strictly_dominates(g, Move::G) ? "true" : "false") << '\n';
  out << "h_dominates_g: " << (strictly_dominates(g, Move::H) ? "true" : "false") << '\n';
  if (auto m = mixed_nash_2x2(g)) {
    out << "mne_p_h: " << m->p_h << '\n';
    out << "mne_payoff: " << m->payoff << '\n';
  } else {
    out << "mne_p_h: none\n";
    out << "mne_payoff: none\n";
  }
  if (g.c > g.d) {
    const Rational delta = min_discount_factor(g);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", delta.to_double());
    out << "delta_min: " << buf << '\n';
    out << "delta_min_exact: " << delta << '\n';
  } else {
    out << "delta_min: undefined\n";
    out << "delta_min_exact: undefined\n";
  }
  return out.str();
}

}  // namespace dagsim::game
