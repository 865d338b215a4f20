#include "csg/game_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "csg/builtin_games.hpp"
#include "csg/error.hpp"
#include "csg/params.hpp"
#include "csg/transform.hpp"

namespace csg {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

std::vector<std::string> split_char(const std::string& text, char c) {
  std::vector<std::string> out;
  std::string cur;
  for (char x : text) {
    if (x == c) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += x;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  fail(ErrorCode::ParseError, "game file line " + std::to_string(line) + ": " + msg);
}

Params params_from(const std::vector<std::string>& toks, std::size_t from) {
  std::string joined;
  for (std::size_t i = from; i < toks.size(); ++i) joined += toks[i] + " ";
  return Params::parse(joined);
}

Dist<StateId> parse_row(const std::vector<std::string>& toks, std::size_t from, std::size_t line) {
  if ((toks.size() - from) % 2 != 0 || toks.size() == from) parse_error(line, "row needs <id> <p> pairs");
  std::vector<std::pair<StateId, Rational>> entries;
  Rational total = 0;
  for (std::size_t i = from; i < toks.size(); i += 2) {
    entries.emplace_back(StateId::parse(toks[i]), parse_rational(toks[i + 1]));
    total += entries.back().second;
  }
  if (total == 1) return Dist<StateId>::exact(std::move(entries));
  std::vector<std::pair<StateId, double>> approx;
  for (auto& [s, p] : entries) approx.emplace_back(s, p.get_d());
  return Dist<StateId>::approx(std::move(approx), 1e-12);
}

}  // namespace

GamePtr read_game(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> lines;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    auto toks = split_ws(raw);
    if (!toks.empty()) lines.emplace_back(line_no, std::move(toks));
  }
  if (lines.empty() || lines[0].second.size() != 2 || lines[0].second[0] != "csg-game" || lines[0].second[1] != "1")
    fail(ErrorCode::ParseError, "game file must start with 'csg-game 1'");

  GamePtr game;
  std::size_t i = 1;
  try {
    if (i < lines.size() && lines[i].second[0] == "builtin") {
      const auto& toks = lines[i].second;
      if (toks.size() < 2) parse_error(lines[i].first, "builtin needs a name");
      game = builtin_game(toks[1], params_from(toks, 2));
      ++i;
    } else {
      std::string name = "game";
      for (std::size_t j = i; j < lines.size() && lines[j].second[0] != "apply"; ++j)
        if (lines[j].second[0] == "name") {
          if (lines[j].second.size() != 2) parse_error(lines[j].first, "name takes one word");
          name = lines[j].second[1];
        }
      GameBuilder b(name);
      std::optional<StateId> initial;
      for (; i < lines.size() && lines[i].second[0] != "apply"; ++i) {
        const auto& [ln, toks] = lines[i];
        const std::string& kw = toks[0];
        if (kw == "name") {
        } else if (kw == "initial") {
          if (toks.size() != 2) parse_error(ln, "initial takes one id");
          initial = StateId::parse(toks[1]);
        } else if (kw == "state") {
          if (toks.size() < 2) parse_error(ln, "state needs an id");
          const StateId id = StateId::parse(toks[1]);
          std::string sname;
          std::vector<std::string> amax{"0"}, amin{"0"};
          bool sink = false, target = false;
          for (std::size_t k = 2; k < toks.size(); ++k) {
            const std::string& t = toks[k];
            if (t == "sink")
              sink = true;
            else if (t == "target")
              target = true;
            else if (t.rfind("name=", 0) == 0)
              sname = t.substr(5);
            else if (t.rfind("max=", 0) == 0)
              amax = split_char(t.substr(4), ',');
            else if (t.rfind("min=", 0) == 0)
              amin = split_char(t.substr(4), ',');
            else
              parse_error(ln, "unknown state attribute '" + t + "'");
          }
          b.add_state(sname, id);
          b.set_actions(id, amax, amin);
          if (sink) b.set_sink(id);
          if (target) b.set_target(id);
        } else if (kw == "row") {
          if (toks.size() < 7 || toks[4] != ":") parse_error(ln, "row <id> <a> <b> : <id> <p> ...");
          b.set_row(StateId::parse(toks[1]), static_cast<ActionIndex>(std::stoul(toks[2])),
                    static_cast<ActionIndex>(std::stoul(toks[3])), parse_row(toks, 5, ln));
        } else if (kw == "any") {
          if (toks.size() < 5 || toks[2] != ":") parse_error(ln, "any <id> : <id> <p> ...");
          b.set_uncontrolled(StateId::parse(toks[1]), parse_row(toks, 3, ln));
        } else {
          parse_error(ln, "unknown keyword '" + kw + "'");
        }
      }
      if (!initial) fail(ErrorCode::ParseError, "game file has no initial state");
      b.set_initial(*initial);
      game = b.build();
    }
    for (; i < lines.size(); ++i) {
      const auto& [ln, toks] = lines[i];
      if (toks[0] != "apply" || toks.size() < 2) parse_error(ln, "expected 'apply <transform> ...'");
      game = apply_transform(game, toks[1], params_from(toks, 2));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  return game;
}

GamePtr read_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return read_game(in);
}

GamePtr parse_game(const std::string& text) {
  std::istringstream in(text);
  return read_game(in);
}

namespace {

std::string prob_text(const Dist<StateId>& row, std::size_t i) {
  if (row.has_exact()) return to_string(row.exact_prob(i));
  std::ostringstream os;
  os << std::setprecision(17) << row.prob(i);
  return os.str();
}

bool plain_word(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == ',' || c == '=') return false;
  return true;
}

}  // namespace

void write_game(std::ostream& out, const Game& game) {
  out << "csg-game 1\n";
  if (auto r = game.recipe()) {
    out << *r << "\n";
    return;
  }
  if (!game.is_finite()) fail(ErrorCode::NotFinite, "lazy game " + game.name() + " has no recipe");
  out << "name " << (plain_word(game.name()) ? game.name() : std::string("game")) << "\n";
  out << "initial " << game.initial_state().to_string() << "\n";
  const auto states = game.states();
  for (const auto& s : states) {
    out << "state " << s.to_string();
    const std::string nm = game.state_name(s);
    if (nm != s.to_string() && plain_word(nm)) out << " name=" << nm;
    auto names = [&](std::size_t n, auto get) {
      std::string joined;
      bool plain = true;
      for (ActionIndex a = 0; a < n; ++a) {
        const std::string x = get(a);
        plain = plain && plain_word(x);
        joined += (a ? "," : "") + x;
      }
      if (!plain) {
        joined.clear();
        for (ActionIndex a = 0; a < n; ++a) joined += (a ? "," : "") + std::to_string(a);
      }
      return joined;
    };
    const std::size_t na = game.num_max_actions(s), nb = game.num_min_actions(s);
    const std::string amax = names(na, [&](ActionIndex a) { return game.max_action_name(s, a); });
    const std::string amin = names(nb, [&](ActionIndex b) { return game.min_action_name(s, b); });
    if (amax != "0") out << " max=" << amax;
    if (amin != "0") out << " min=" << amin;
    if (game.is_sink(s)) out << " sink";
    if (game.is_target(s)) out << " target";
    out << "\n";
  }
  for (const auto& s : states) {
    if (game.is_sink(s)) continue;
    for (ActionIndex a = 0; a < game.num_max_actions(s); ++a)
      for (ActionIndex b = 0; b < game.num_min_actions(s); ++b) {
        const Dist<StateId> row = game.kernel(s, a, b);
        out << "row " << s.to_string() << " " << a << " " << b << " :";
        for (std::size_t i = 0; i < row.size(); ++i) out << " " << row.outcome(i).to_string() << " " << prob_text(row, i);
        out << "\n";
      }
  }
}

std::string game_to_string(const Game& game) {
  std::ostringstream os;
  write_game(os, game);
  return os.str();
}

}  // namespace csg
