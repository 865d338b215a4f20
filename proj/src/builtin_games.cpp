#include "csg/builtin_games.hpp"

#include <algorithm>
#include <numeric>

#include "csg/error.hpp"
#include "csg/rng.hpp"

namespace csg {

namespace {

Rational half_pow(std::int64_t i) {
  mpz_class den = 1;
  den <<= static_cast<mp_bitcnt_t>(i);
  return Rational(mpz_class(1), den);
}

Dist<StateId> two_way(const StateId& x, const Rational& px, const StateId& y) {
  if (px == 1) return Dist<StateId>::dirac(x);
  if (px == 0) return Dist<StateId>::dirac(y);
  return Dist<StateId>::exact({{x, px}, {y, 1 - px}});
}

std::shared_ptr<const TableGame> bad_match_impl(bool simplified) {
  GameBuilder b(simplified ? "simplified_bad_match" : "bad_match");
  auto d = b.add_state("d", bm::d);
  std::optional<StateId> w;
  if (!simplified) w = b.add_state("w", bm::w);
  auto l = b.add_state("l", bm::l);
  auto s = b.add_state("s", bm::s);
  auto t = b.add_state("t", bm::t);
  b.set_actions(d, {"0", "1"}, {"0", "1"});
  b.set_row(d, 1, 1, Dist<StateId>::dirac(simplified ? s : *w));
  b.set_row(d, 1, 0, Dist<StateId>::dirac(l));
  b.set_row(d, 0, 1, Dist<StateId>::dirac(t));
  b.set_row(d, 0, 0, Dist<StateId>::dirac(s));
  if (w) {
    b.set_sink(*w);
    b.set_target(*w);
  }
  b.set_sink(l);
  b.set_uncontrolled(s, Dist<StateId>::dirac(d));
  b.set_uncontrolled(t, Dist<StateId>::dirac(d));
  b.set_target(s);
  b.set_initial(d);
  return b.build();
}

class TurnBasedBadMatch final : public Game {
 public:
  std::string name() const override { return "turnbased_bad_match"; }
  StateId initial_state() const override { return tbm::d(0); }
  bool is_finite() const override { return false; }

  bool has_state(const StateId& s) const override {
    if (s.size() == 2 && (s[0] == 0 || s[0] == 1)) return s[1] >= 0;
    if (s.size() == 3 && s[0] == 2) return (s[1] == 0 || s[1] == 1) && (s[2] == 0 || s[2] == 1);
    return s.size() == 1 && s[0] >= 3 && s[0] <= 5;
  }
  std::size_t num_max_actions(const StateId& s) const override { return s.size() == 2 && s[0] == 0 ? 2 : 1; }
  std::size_t num_min_actions(const StateId& s) const override { return s.size() == 2 && s[0] == 1 ? 2 : 1; }
  bool is_sink(const StateId& s) const override { return s == tbm::l; }
  bool is_target(const StateId& s) const override { return s == tbm::s; }

  std::string state_name(const StateId& s) const override {
    if (s.size() == 2) return (s[0] == 0 ? "d" : "e") + std::to_string(s[1]);
    if (s.size() == 3) return "(" + std::to_string(s[1]) + "," + std::to_string(s[2]) + ")";
    if (s == tbm::s) return "s";
    if (s == tbm::t) return "t";
    if (s == tbm::l) return "l";
    return s.to_string();
  }
  std::string max_action_name(const StateId& s, ActionIndex a) const override {
    if (s.size() == 2 && s[0] == 0) return a == 0 ? "next" : "enter";
    return std::to_string(a);
  }
  std::optional<std::string> recipe() const override { return "builtin turnbased_bad_match"; }

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision) const override {
    if (s.size() == 2 && s[0] == 0) return Dist<StateId>::dirac(a == 0 ? tbm::d(s[1] + 1) : tbm::e(s[1]));
    if (s.size() == 2) {
      Rational p = half_pow(s[1]);
      return b == 0 ? two_way(tbm::pair(1, 0), p, tbm::pair(0, 0)) : two_way(tbm::pair(1, 1), p, tbm::pair(0, 1));
    }
    if (s.size() == 3) {
      if (s[1] == s[2]) return Dist<StateId>::dirac(tbm::s);
      return Dist<StateId>::dirac(s[1] == 0 ? tbm::t : tbm::l);
    }
    if (s == tbm::l) return Dist<StateId>::dirac(tbm::l);
    return Dist<StateId>::dirac(tbm::d(0));
  }
};

class OneWayChain final : public Game {
 public:
  explicit OneWayChain(std::optional<std::int64_t> n) : n_(n) {}

  std::string name() const override { return n_ ? "one_way_chain_" + std::to_string(*n_) : "one_way_chain"; }
  StateId initial_state() const override { return owc::chain(0); }
  bool is_finite() const override { return n_.has_value(); }
  std::vector<StateId> states() const override {
    if (!n_) return Game::states();
    std::vector<StateId> out{owc::trap};
    for (std::int64_t i = 0; i <= *n_; ++i) out.push_back(owc::chain(i));
    return out;
  }

  bool has_state(const StateId& s) const override {
    if (s == owc::trap) return true;
    return s.size() == 2 && s[0] == 1 && s[1] >= 0 && (!n_ || s[1] <= *n_);
  }
  std::size_t num_max_actions(const StateId& s) const override { return is_sink(s) ? 1 : 2; }
  std::size_t num_min_actions(const StateId& s) const override { return is_sink(s) ? 1 : 2; }
  bool is_sink(const StateId& s) const override { return s == owc::trap || (n_ && s == owc::chain(*n_)); }
  bool is_target(const StateId& s) const override { return n_ && s == owc::chain(*n_); }

  std::string state_name(const StateId& s) const override {
    if (s == owc::trap) return "z";
    if (s.size() == 2) return "c" + std::to_string(s[1]);
    return s.to_string();
  }
  std::string max_action_name(const StateId& s, ActionIndex a) const override {
    if (is_sink(s)) return "stay";
    return a == 0 ? "advance" : "loop";
  }
  std::string min_action_name(const StateId& s, ActionIndex b) const override {
    if (is_sink(s)) return "stay";
    return b == 0 ? "let" : "reset";
  }
  std::optional<std::string> recipe() const override {
    return n_ ? "builtin one_way_chain n=" + std::to_string(*n_) : std::string("builtin one_way_chain");
  }

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision) const override {
    if (is_sink(s)) return Dist<StateId>::dirac(s);
    const std::int64_t i = s[1];
    if (a == 1) return Dist<StateId>::dirac(s);
    StateId next = owc::chain(i + 1);
    if (b == 0) return Dist<StateId>::dirac(next);
    Rational p = half_pow(i + 2);
    return Dist<StateId>::exact({{owc::chain(0), p}, {owc::trap, p}, {next, 1 - 2 * p}});
  }

 private:
  std::optional<std::int64_t> n_;
};

class LadderDemo final : public Game {
 public:
  std::string name() const override { return "ladder_demo"; }
  StateId initial_state() const override { return StateId{0}; }
  bool is_finite() const override { return false; }
  bool has_state(const StateId& s) const override {
    if (s.size() == 1) return s[0] == 0 || s[0] == 2 || s[0] == 3;
    return s.size() == 2 && s[0] == 1 && s[1] >= 1;
  }
  std::size_t num_max_actions(const StateId&) const override { return 1; }
  std::size_t num_min_actions(const StateId&) const override { return 1; }
  bool is_sink(const StateId& s) const override { return s == StateId{2} || s == StateId{3}; }
  bool is_target(const StateId& s) const override { return s == StateId{2}; }
  std::string state_name(const StateId& s) const override {
    if (s == StateId{0}) return "c";
    if (s == StateId{2}) return "goal";
    if (s == StateId{3}) return "lose";
    if (s.size() == 2) return "s" + std::to_string(s[1]);
    return s.to_string();
  }
  std::optional<std::function<StateId(std::int64_t)>> min_branch_family(const StateId& s) const override {
    if (s != StateId{0}) return std::nullopt;
    return [](std::int64_t i) { return StateId{1, i}; };
  }
  std::optional<std::string> recipe() const override { return "builtin ladder_demo"; }

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex, ActionIndex, Precision) const override {
    if (s == StateId{0}) return Dist<StateId>::dirac(StateId{1, 1});
    if (s.size() == 2) return two_way(StateId{2}, half_pow(s[1]), StateId{3});
    return Dist<StateId>::dirac(s);
  }
};

}  // namespace

std::shared_ptr<const TableGame> bad_match() { return bad_match_impl(false); }
std::shared_ptr<const TableGame> simplified_bad_match() { return bad_match_impl(true); }
GamePtr turnbased_bad_match() { return std::make_shared<const TurnBasedBadMatch>(); }

GamePtr one_way_chain(std::optional<std::int64_t> n) {
  if (n && *n < 1) fail(ErrorCode::BadParams, "one_way_chain needs n >= 1");
  return std::make_shared<const OneWayChain>(n);
}

GamePtr ladder_demo() { return std::make_shared<const LadderDemo>(); }

std::shared_ptr<const TableGame> random_game(std::uint64_t seed, std::size_t states, std::size_t max_actions,
                                             std::size_t min_actions, std::size_t bad) {
  if (states < 1 || max_actions < 1 || min_actions < 1 || bad > states)
    fail(ErrorCode::BadParams, "random_game: bad dimensions");
  RngStream rng(seed, 0x72616e64ULL);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.next_u64() % n); };
  GameBuilder b("random_game_" + std::to_string(seed));
  std::vector<StateId> ids;
  for (std::size_t i = 0; i < states; ++i) ids.push_back(b.add_state("q" + std::to_string(i)));
  std::vector<std::string> am, bm_;
  for (std::size_t a = 0; a < max_actions; ++a) am.push_back(std::to_string(a));
  for (std::size_t c = 0; c < min_actions; ++c) bm_.push_back(std::to_string(c));
  for (std::size_t i = 0; i < states; ++i) {
    b.set_actions(ids[i], am, bm_);
    if (i + bad >= states) b.set_target(ids[i]);
    for (ActionIndex a = 0; a < max_actions; ++a) {
      for (ActionIndex c = 0; c < min_actions; ++c) {
        std::size_t k = 1 + pick(std::min<std::size_t>(3, states));
        std::vector<std::size_t> perm(states);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t j = 0; j < k; ++j) std::swap(perm[j], perm[j + pick(states - j)]);
        std::vector<long> weights(k);
        long total = 0;
        for (auto& w : weights) total += (w = 1 + static_cast<long>(pick(4)));
        std::vector<std::pair<StateId, Rational>> row;
        for (std::size_t j = 0; j < k; ++j) {
          Rational w(weights[j], total);
          w.canonicalize();
          row.emplace_back(ids[perm[j]], w);
        }
        b.set_row(ids[i], a, c, Dist<StateId>::exact(std::move(row)));
      }
    }
  }
  b.set_initial(ids[0]);
  return b.build();
}

GamePtr builtin_game(std::string_view name, const Params& params) {
  if (name == "bad_match") {
    params.require_only({});
    return bad_match();
  }
  if (name == "simplified_bad_match") {
    params.require_only({});
    return simplified_bad_match();
  }
  if (name == "turnbased_bad_match") {
    params.require_only({});
    return turnbased_bad_match();
  }
  if (name == "one_way_chain") {
    params.require_only({"n"});
    if (params.has("n")) return one_way_chain(params.get_int("n"));
    return one_way_chain();
  }
  if (name == "ladder_demo") {
    params.require_only({});
    return ladder_demo();
  }
  if (name == "random_game") {
    params.require_only({"seed", "states", "max_actions", "min_actions", "bad"});
    auto positive = [&](const char* key, std::int64_t dflt) {
      std::int64_t v = params.get_int(key, dflt);
      if (v < 0) fail(ErrorCode::BadParams, std::string("random_game: negative ") + key);
      return static_cast<std::size_t>(v);
    };
    return random_game(static_cast<std::uint64_t>(params.get_int("seed")), positive("states", 5),
                       positive("max_actions", 2), positive("min_actions", 2), positive("bad", 1));
  }
  fail(ErrorCode::UnknownName, "no builtin game named '" + std::string(name) + "'");
}

}  // namespace csg
