#include "csg/strategy.hpp"

#include <array>

#include "csg/error.hpp"

namespace csg {

std::string_view strategy_class_name(StrategyClass c) {
  switch (c) {
    case StrategyClass::Memoryless: return "memoryless";
    case StrategyClass::FiniteMemory: return "finite_memory";
    case StrategyClass::Markov: return "markov";
    case StrategyClass::OneBit: return "one_bit";
    case StrategyClass::OneBitMarkov: return "one_bit_markov";
    case StrategyClass::General: return "general";
  }
  return "general";
}

StrategyClass StrategyMachine::strategy_class() const {
  auto modes = num_local_modes();
  if (!uses_step_counter()) {
    if (modes == 1) return StrategyClass::Memoryless;
    if (modes == 2) return StrategyClass::OneBit;
    return modes ? StrategyClass::FiniteMemory : StrategyClass::General;
  }
  if (modes == 1) return StrategyClass::Markov;
  if (modes == 2) return StrategyClass::OneBitMarkov;
  return StrategyClass::General;
}

namespace {

void check_mode(const StrategyMachine& machine, const Mode& m) {
  auto modes = machine.num_local_modes();
  if (m.local < 0 || (modes && m.local >= *modes))
    fail(ErrorCode::ModeOutOfRange, "mode " + std::to_string(m.local) + " outside the range of " + machine.describe());
}

}  // namespace

Dist<ActionIndex> checked_act(const StrategyMachine& machine, const Mode& m, const StateId& s, std::size_t num_actions) {
  check_mode(machine, m);
  Dist<ActionIndex> d = machine.act(m, s, num_actions);
  for (const auto& e : d.entries())
    if (e.outcome >= num_actions)
      fail(ErrorCode::IllegalAction, machine.describe() + " plays unavailable action " + std::to_string(e.outcome) +
                                         " at " + s.to_string());
  return d;
}

ActionIndex strategy_act(const StrategyMachine& machine, const Mode& m, const StateId& s, std::size_t num_actions,
                         RngStream& rng) {
  return checked_act(machine, m, s, num_actions).sample(rng.uniform());
}

Mode strategy_update(const StrategyMachine& machine, const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                     const StateId& next, RngStream& rng) {
  check_mode(machine, m);
  Dist<LocalMode> d = machine.update(m, s, a, b, next);
  Mode out{m.step + 1, d.sample(rng.uniform())};
  check_mode(machine, out);
  return out;
}

Dist<ActionIndex> bernoulli_action(const Rational& q) {
  if (q < 0 || q > 1) fail(ErrorCode::BadParams, "probability " + to_string(q) + " outside [0,1]");
  if (q == 0) return Dist<ActionIndex>::dirac(0);
  if (q == 1) return Dist<ActionIndex>::dirac(1);
  return Dist<ActionIndex>::exact({{0, 1 - q}, {1, q}});
}

Dist<ActionIndex> bernoulli_action(double q) {
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorCode::BadParams, "probability outside [0,1]");
  if (q == 0.0) return Dist<ActionIndex>::dirac(0);
  if (q == 1.0) return Dist<ActionIndex>::dirac(1);
  return Dist<ActionIndex>::approx({{0, 1.0 - q}, {1, q}});
}

// --------------------------------------------------------------- memoryless

MemorylessMachine::MemorylessMachine(std::string label, std::unordered_map<StateId, Dist<ActionIndex>> table,
                                     Fallback fallback)
    : label_(std::move(label)), table_(std::move(table)), fallback_(std::move(fallback)) {}

Dist<ActionIndex> MemorylessMachine::act(const Mode&, const StateId& s, std::size_t num_actions) const {
  if (auto it = table_.find(s); it != table_.end()) return it->second;
  if (fallback_) return fallback_(s, num_actions);
  return Dist<ActionIndex>::dirac(0);
}

StrategyPtr always(ActionIndex action) {
  auto m = std::make_shared<MemorylessMachine>(
      "always(" + std::to_string(action) + ")", std::unordered_map<StateId, Dist<ActionIndex>>{},
      [action](const StateId&, std::size_t n) { return Dist<ActionIndex>::dirac(action < n ? action : 0); });
  m->set_recipe("constructor always action=" + std::to_string(action));
  return m;
}

StrategyPtr constant_mix(const Rational& q) {
  Dist<ActionIndex> mix = bernoulli_action(q);
  auto m = std::make_shared<MemorylessMachine>(
      "constant_mix(" + to_string(q) + ")", std::unordered_map<StateId, Dist<ActionIndex>>{},
      [mix](const StateId&, std::size_t n) { return n >= 2 ? mix : Dist<ActionIndex>::dirac(0); });
  m->set_recipe("constructor constant_mix q=" + to_string(q));
  return m;
}

// -------------------------------------------------------------------- table

TableMachine::TableMachine(std::string label, std::int64_t modes, LocalMode initial, std::vector<ActEntry> acts,
                           std::vector<UpdateRule> updates)
    : label_(std::move(label)), modes_(modes), initial_(initial), acts_(std::move(acts)), updates_(std::move(updates)) {
  if (modes_ < 1) fail(ErrorCode::BadParams, "table machine needs at least one mode");
  if (initial_ < 0 || initial_ >= modes_) fail(ErrorCode::ModeOutOfRange, "initial mode out of range");
  for (const auto& r : updates_) {
    if (!r.to.is_dirac()) dirac_ = false;
    for (const auto& e : r.to.entries())
      if (e.outcome < 0 || e.outcome >= modes_) fail(ErrorCode::ModeOutOfRange, "update targets an unknown mode");
    if (r.mode && (*r.mode < 0 || *r.mode >= modes_)) fail(ErrorCode::ModeOutOfRange, "update from an unknown mode");
  }
  for (const auto& e : acts_)
    if (e.mode && (*e.mode < 0 || *e.mode >= modes_)) fail(ErrorCode::ModeOutOfRange, "act entry for an unknown mode");
}

Dist<ActionIndex> TableMachine::act(const Mode& m, const StateId& s, std::size_t) const {
  for (const auto& e : acts_)
    if ((!e.mode || *e.mode == m.local) && (!e.state || *e.state == s)) return e.action;
  return Dist<ActionIndex>::dirac(0);
}

Dist<LocalMode> TableMachine::update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                                     const StateId& next) const {
  for (const auto& r : updates_) {
    if (r.mode && *r.mode != m.local) continue;
    if (r.state && *r.state != s) continue;
    if (r.a && *r.a != a) continue;
    if (r.b && *r.b != b) continue;
    if (r.next && *r.next != next) continue;
    return r.to;
  }
  return Dist<LocalMode>::dirac(m.local);
}

StrategyPtr periodic2(const Rational& q0, const Rational& q1) {
  std::array<Dist<ActionIndex>, 2> mix{bernoulli_action(q0), bernoulli_action(q1)};
  auto m = std::make_shared<LambdaMachine>(
      "periodic2(" + to_string(q0) + "," + to_string(q1) + ")", 2, false, true,
      [mix](const Mode& mode, const StateId&, std::size_t n) {
        return n >= 2 ? mix[static_cast<std::size_t>(mode.local)] : Dist<ActionIndex>::dirac(0);
      },
      [](const Mode& mode, const StateId&, ActionIndex, ActionIndex, const StateId&) {
        return Dist<LocalMode>::dirac(1 - mode.local);
      });
  m->set_recipe("constructor periodic2 q0=" + to_string(q0) + " q1=" + to_string(q1));
  return m;
}

// ------------------------------------------------------------------- lambda

LambdaMachine::LambdaMachine(std::string label, std::optional<std::int64_t> modes, bool step_counter, bool dirac,
                             ActFn act, UpdateFn update, LocalMode initial)
    : label_(std::move(label)),
      modes_(modes),
      step_counter_(step_counter),
      dirac_(dirac),
      act_(std::move(act)),
      update_(std::move(update)),
      initial_(initial) {}

Dist<LocalMode> LambdaMachine::update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                                      const StateId& next) const {
  if (!update_) return Dist<LocalMode>::dirac(m.local);
  return update_(m, s, a, b, next);
}

}  // namespace csg
