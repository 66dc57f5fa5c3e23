#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "plantkg/mapping/rules.hpp"
#include "plantkg/rdf/graph.hpp"

namespace plantkg::mapping {

// A CSV file loaded against a source declaration.  The header must equal the
// declared column names in order, and every cell of a typed column must parse
// as its kind.  Per-column value indexes support pruned row access.
class Table {
 public:
  Table(SourceDecl decl, const std::string& resolved_path);

  const SourceDecl& decl() const { return decl_; }
  std::size_t row_count() const { return rows_.size(); }
  const std::string& cell(std::size_t row, std::size_t col) const {
    return rows_[row][col];
  }
  // Column position by name; throws on unknown names.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  // Indexes of the rows whose `col` cell equals `value` (ascending).
  const std::vector<std::size_t>& rows_with(std::size_t col,
                                            const std::string& value) const;

 private:
  SourceDecl decl_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::unordered_map<std::string, std::vector<std::size_t>>> indexes_;
};

// All declared sources loaded into memory.  Relative source paths resolve
// against `base_dir`; `overrides` replaces declared paths by source id (used
// to point the sensor-log source at freshly generated data).
class BoundSources {
 public:
  static BoundSources bind(const MappingRuleSet& ruleset, const std::string& base_dir,
                           const std::map<std::string, std::string>& overrides = {});

  const Table& table(const std::string& id) const;

 private:
  std::map<std::string, Table> tables_;
};

// Triples produced by one rule for one row, in emission order (type
// assertion first, then predicate-object maps).  Errors carry the rule id
// and row number.
std::vector<rdf::Triple> map_row(const MappingRule& rule, const BoundSources& bound,
                                 std::size_t row);

// Applies every rule to every row of its source. Deterministic; result
// namespaces carry the built-in prefix table.
rdf::Graph materialize(const MappingRuleSet& ruleset, const BoundSources& bound);

// Lazy triple source over the rules: rows are only visited when a pattern
// can match a rule's emission, and concrete pattern terms prune the visited
// rows through template inversion and column indexes.  The two counters
// exist so tests can assert the pruning actually happens; they are totals
// across calls (atomic, but not otherwise synchronized).
class VirtualView : public rdf::TripleSource {
 public:
  // The view copies the rules; `bound` is referenced and must outlive it.
  VirtualView(MappingRuleSet ruleset, const BoundSources& bound);
  ~VirtualView() override;

  void match(const rdf::TriplePattern& pattern,
             const std::function<void(const rdf::Binding&)>& sink) const override;

  std::uint64_t rows_scanned() const { return rows_scanned_.load(); }
  std::uint64_t bindings_emitted() const { return bindings_emitted_.load(); }
  void reset_counters() const;

 private:
  struct Emission;  // one (subject expr, predicate, object expr) shape

  MappingRuleSet rules_;
  const BoundSources& bound_;
  std::vector<Emission> emissions_;
  mutable std::atomic<std::uint64_t> rows_scanned_{0};
  mutable std::atomic<std::uint64_t> bindings_emitted_{0};
};

}  // namespace plantkg::mapping
