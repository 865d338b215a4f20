#include "csg/strategy_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "csg/error.hpp"
#include "csg/params.hpp"
#include "csg/strategies.hpp"
#include "csg/transform.hpp"

namespace csg {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  fail(ErrorCode::ParseError, "strategy file line " + std::to_string(line) + ": " + msg);
}

Params params_from(const std::vector<std::string>& toks, std::size_t from) {
  std::string joined;
  for (std::size_t i = from; i < toks.size(); ++i) joined += toks[i] + " ";
  return Params::parse(joined);
}

template <class T, class Parse>
Dist<T> parse_dist(const std::vector<std::string>& toks, std::size_t from, std::size_t line, Parse parse) {
  if (toks.size() == from || (toks.size() - from) % 2 != 0) parse_error(line, "expected <value> <p> pairs");
  std::vector<std::pair<T, Rational>> entries;
  Rational total = 0;
  for (std::size_t i = from; i < toks.size(); i += 2) {
    entries.emplace_back(parse(toks[i]), parse_rational(toks[i + 1]));
    total += entries.back().second;
  }
  if (total == 1) return Dist<T>::exact(std::move(entries));
  std::vector<std::pair<T, double>> approx;
  for (auto& [x, p] : entries) approx.emplace_back(x, p.get_d());
  return Dist<T>::approx(std::move(approx), 1e-12);
}

template <class T, class Parse>
std::optional<T> wild(const std::string& tok, Parse parse) {
  if (tok == "*") return std::nullopt;
  return parse(tok);
}

std::int64_t to_int(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

ActionIndex to_action(const std::string& s) {
  const std::int64_t v = to_int(s);
  if (v < 0) throw std::invalid_argument("negative action: " + s);
  return static_cast<ActionIndex>(v);
}

StrategyPtr read_constructed(const std::vector<std::pair<std::size_t, std::vector<std::string>>>& lines) {
  const auto& first = lines[1].second;
  if (first.size() < 2) parse_error(lines[1].first, "constructor needs a name");
  StrategyPtr m = make_strategy(first[1], params_from(first, 2));
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto& [ln, toks] = lines[i];
    if (toks[0] != "wrap" || toks.size() < 2) parse_error(ln, "expected 'wrap <name> ...'");
    const Params p = params_from(toks, 2);
    if (toks[1] == "leak_schedule") {
      p.require_only({"eps", "grid", "max_exponent"});
      LeakGrid grid = p.has("grid") ? LeakGrid(p.get_rational_list("grid"))
                                    : LeakGrid::dyadic(static_cast<int>(p.get_int("max_exponent", 40)));
      m = leak_schedule_transfer(m, p.get_rational("eps"), std::move(grid));
    } else {
      parse_error(ln, "unknown wrapper '" + toks[1] + "'");
    }
  }
  return m;
}

StrategyPtr read_table(const std::vector<std::pair<std::size_t, std::vector<std::string>>>& lines) {
  std::int64_t modes = 1;
  LocalMode initial = 0;
  std::vector<TableMachine::ActEntry> acts;
  std::vector<TableMachine::UpdateRule> updates;
  auto parse_state = [](const std::string& t) { return StateId::parse(t); };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [ln, toks] = lines[i];
    const std::string& kw = toks[0];
    if (kw == "modes") {
      if (toks.size() != 2) parse_error(ln, "modes takes one integer");
      modes = to_int(toks[1]);
      if (modes < 1) parse_error(ln, "modes must be positive");
    } else if (kw == "initial") {
      if (toks.size() != 2) parse_error(ln, "initial takes one mode");
      initial = to_int(toks[1]);
    } else if (kw == "act") {
      if (toks.size() < 6 || toks[3] != ":") parse_error(ln, "act <mode|*> <id|*> : <a> <p> ...");
      acts.push_back({wild<LocalMode>(toks[1], to_int), wild<StateId>(toks[2], parse_state),
                      parse_dist<ActionIndex>(toks, 4, ln, to_action)});
    } else if (kw == "update") {
      if (toks.size() < 9 || toks[6] != ":") parse_error(ln, "update <mode|*> <id|*> <a|*> <b|*> <next|*> : ...");
      updates.push_back({wild<LocalMode>(toks[1], to_int), wild<StateId>(toks[2], parse_state),
                         wild<ActionIndex>(toks[3], to_action), wild<ActionIndex>(toks[4], to_action),
                         wild<StateId>(toks[5], parse_state), parse_dist<LocalMode>(toks, 7, ln, to_int)});
    } else {
      parse_error(ln, "unknown keyword '" + kw + "'");
    }
  }
  if (initial < 0 || initial >= modes) fail(ErrorCode::ModeOutOfRange, "initial mode outside 0.." + std::to_string(modes - 1));
  for (const auto& u : updates)
    for (const auto& e : u.to.entries())
      if (e.outcome < 0 || e.outcome >= modes)
        fail(ErrorCode::ModeOutOfRange, "update target mode " + std::to_string(e.outcome) + " out of range");
  return std::make_shared<TableMachine>("table(" + std::to_string(modes) + " modes)", modes, initial, std::move(acts),
                                        std::move(updates));
}

}  // namespace

StrategyPtr read_strategy(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream is(raw);
    std::vector<std::string> toks;
    for (std::string t; is >> t;) toks.push_back(t);
    if (!toks.empty()) lines.emplace_back(line_no, std::move(toks));
  }
  if (lines.empty() || lines[0].second != std::vector<std::string>{"csg-strategy", "1"})
    fail(ErrorCode::ParseError, "strategy file must start with 'csg-strategy 1'");
  if (lines.size() < 2) fail(ErrorCode::ParseError, "empty strategy file");
  try {
    if (lines[1].second[0] == "constructor") return read_constructed(lines);
    return read_table(lines);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
}

StrategyPtr read_strategy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return read_strategy(in);
}

StrategyPtr parse_strategy(const std::string& text) {
  std::istringstream in(text);
  return read_strategy(in);
}

namespace {

template <class T>
void write_dist(std::ostream& out, const Dist<T>& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << " " << d.outcome(i) << " ";
    if (d.has_exact())
      out << to_string(d.exact_prob(i));
    else
      out << std::setprecision(17) << d.prob(i);
  }
}

std::string wild_text(const std::optional<StateId>& s) { return s ? s->to_string() : "*"; }
template <class T>
std::string wild_text(const std::optional<T>& x) {
  return x ? std::to_string(*x) : "*";
}

}  // namespace

void write_strategy(std::ostream& out, const StrategyMachine& machine) {
  out << "csg-strategy 1\n";
  if (auto r = machine.recipe()) {
    out << *r << "\n";
    return;
  }
  if (auto* mm = dynamic_cast<const MemorylessMachine*>(&machine)) {
    std::vector<StateId> keys;
    for (const auto& [s, d] : mm->table()) keys.push_back(s);
    std::sort(keys.begin(), keys.end());
    out << "modes 1\ninitial 0\n";
    for (const auto& s : keys) {
      out << "act * " << s.to_string() << " :";
      write_dist(out, mm->table().at(s));
      out << "\n";
    }
    return;
  }
  if (auto* tm = dynamic_cast<const TableMachine*>(&machine)) {
    out << "modes " << *tm->num_local_modes() << "\ninitial " << tm->initial_mode() << "\n";
    for (const auto& a : tm->acts()) {
      out << "act " << wild_text(a.mode) << " " << wild_text(a.state) << " :";
      write_dist(out, a.action);
      out << "\n";
    }
    for (const auto& u : tm->updates()) {
      out << "update " << wild_text(u.mode) << " " << wild_text(u.state) << " " << wild_text(u.a) << " "
          << wild_text(u.b) << " " << wild_text(u.next) << " :";
      write_dist(out, u.to);
      out << "\n";
    }
    return;
  }
  fail(ErrorCode::NotFinite, "strategy " + machine.describe() + " has no file form");
}

std::string strategy_to_string(const StrategyMachine& machine) {
  std::ostringstream os;
  write_strategy(os, machine);
  return os.str();
}

}  // namespace csg
