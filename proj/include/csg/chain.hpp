#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "csg/game.hpp"
#include "csg/objective.hpp"
#include "csg/strategy.hpp"

namespace csg {

/// Finite Markov chain induced by a game and two finite-memory machines,
/// over the part reachable from the start.
struct ProductChain {
  struct Node {
    StateId state;
    LocalMode max_mode = 0;
    LocalMode min_mode = 0;
  };
  struct Edge {
    std::uint32_t to;
    double p;
  };
  struct ExactEdge {
    std::uint32_t to;
    Rational p;
  };

  std::vector<Node> nodes;  // nodes[0] is the start
  std::vector<std::vector<Edge>> rows;
  std::vector<std::vector<ExactEdge>> exact_rows;  // empty unless exact
  bool exact = false;

  std::size_t size() const { return nodes.size(); }
  /// Nodes whose game state lies in `set`.
  std::vector<char> label(const StateSet& set) const;
  std::vector<char> label_state(const StateId& s) const;
  std::string node_name(std::uint32_t i) const;
};

/// Builds the chain from (start, σ initial mode, π initial mode). Both
/// machines must be finite-memory (NotFiniteMemory otherwise). With exact = true
/// every kernel row and every act/update distribution must carry exact
/// weights. Fails with BadParams beyond `max_nodes` reachable nodes.
ProductChain product_chain(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, bool exact = true,
                           std::optional<StateId> start = std::nullopt, std::size_t max_nodes = 1000000);

struct BsccDecomposition {
  std::vector<std::vector<std::uint32_t>> bsccs;  // each sorted; ordered by smallest node
  std::vector<std::uint32_t> transient;
  std::vector<int> component_of;  // BSCC index or -1
};

/// Tarjan condensation; the BSCCs are the terminal components.
BsccDecomposition bscc_decompose(const ProductChain& chain);

struct EventProb {
  Rational exact;  // meaningful when chain.exact
  double value = 0.0;
};

enum class ChainEvent { Reach, Buchi, Avoid };

/// Probability from node `from` of Reach(label), Buchi(label) or
/// Avoid(label). Reach solves the linear system on the nodes that can reach
/// the label; Buchi is the absorption probability into BSCCs meeting the label.
EventProb exact_event_prob(const ProductChain& chain, ChainEvent event, const std::vector<char>& label,
                           std::uint32_t from = 0);

/// Reach probabilities from every node (exact when the chain is).
std::vector<Rational> reach_probabilities(const ProductChain& chain, const std::vector<char>& label);
std::vector<double> reach_probabilities_float(const ProductChain& chain, const std::vector<char>& label);

/// Distribution over nodes after k steps from `from` (exact chains only).
std::vector<Rational> distribution_after(const ProductChain& chain, std::size_t k, std::uint32_t from = 0);

/// Mass outside all BSCCs after k steps.
EventProb transient_mass_at(const ProductChain& chain, std::size_t k, std::uint32_t from = 0);

/// Least k <= cap with transient mass <= bound, if any.
std::optional<std::size_t> first_step_with_transient_mass_le(const ProductChain& chain, const Rational& bound,
                                                             std::size_t cap, std::uint32_t from = 0);

/// Probability that the play from `from` visits `node` at least n times:
/// R * rho^(n-1), with R the probability of reaching the node and rho the
/// probability of returning to it.
EventProb visit_at_least(const ProductChain& chain, std::uint32_t node, std::size_t n, std::uint32_t from = 0);

struct SumProdCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
/// 1 - sum a_k versus prod (1 - a_k); OutOfRange for a_k outside [0,1].
SumProdCheck one_minus_sum_le_prod(const std::vector<double>& a);
SumProdCheck one_minus_sum_le_prod(const std::vector<Rational>& a);

/// "src dst p" lines, one per edge, with p as a fraction when exact.
void write_edge_list(std::ostream& out, const ProductChain& chain);

}  // namespace csg
