#pragma once

#include "colrec/collective.hpp"
#include "colrec/csv.hpp"
#include "colrec/learner.hpp"
#include "colrec/matrix.hpp"
#include "colrec/popularity_gap.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace colrec {

/// Two popular items liked by m_maj users each, two minority items liked by
/// m_minor users each. Shape (2 m_maj + 2 m_minor) x 4, majority rows first.
struct D2Spec {
  Index m_maj = 4;
  Index m_minor = 1;
};

/// `popular_items` groups of `group_size` users rating their item 1, one picky
/// item rated 1 by `picky_users`, one niche item rated 1 by `niche_users`.
struct S1Spec {
  Index popular_items = 4;
  Index group_size = 100;
  Index picky_users = 4;
  Index niche_users = 1;
};

/// Random majority-minority matrix with a singular value gap. Majority users
/// rate their own popular item 1 and the other popular items U[0, off_max];
/// each minority item is picky, rated U[0.5, 1] by 1 .. minority_group_max users.
struct BlockSpec {
  Index popular_items = 4;
  Index group_min = 20;
  Index group_max = 60;
  Index minority_items = 2;
  Index minority_group_max = 4;
  double off_max = 0.3;
};

struct CsvSource {
  std::string path;
  std::vector<std::string> majority_items;  // item ids; majority users are their raters
};

using MatrixSource = std::variant<D2Spec, S1Spec, BlockSpec, PopGapSpec, CsvSource>;

struct AlphaSweep {
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  std::vector<double> values() const;  // from, from + step, ... <= to (+1e-12 slack)
};

/// "auto" is only meaningful for popularity-gap sources: a point near the low end of G(n_bar, R*).
struct AlphaAuto {};

using AlphaSetting = std::variant<double, AlphaSweep, AlphaAuto>;

/// Uprating of a minority item by a stratified fraction of the majority.
struct UpratingSpec {
  std::optional<Index> target_item;  // default: the first picky item
  double fraction = 1.0;
  std::optional<double> eta;  // empty means: run the finder
};

/// Popularity-gap strategy: a random fraction of majority users rate item n_bar `value`.
struct GeneralSpec {
  double fraction = 0.1;
  double value = 0.7;
};

using StrategySpec = std::variant<UpratingSpec, GeneralSpec>;

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  MatrixSource source = S1Spec{};
  AlphaSetting alpha = 2.1;
  std::optional<StrategySpec> strategy;
  Index top_k = 1;
  TieBreak::Mode tie_break = TieBreak::Mode::seeded;
};

/// Throws std::invalid_argument on malformed documents; messages name the offending key.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

struct MaterializedScenario {
  RatingsTable table;
  std::optional<GroupPartition> partition;     // block families and CSV sources
  std::optional<PopGapInstance> popgap;        // popularity-gap family
  std::string family;
};

/// Deterministic in the scenario seed. Throws std::runtime_error when the
/// family cannot satisfy its structural requirements (e.g. no gap within the retry budget).
MaterializedScenario generate_scenario(const Scenario& s);

RatingsMatrix generate_d2(const D2Spec& spec);
RatingsMatrix generate_s1(const S1Spec& spec);
GroupPartition d2_partition(const D2Spec& spec);
GroupPartition s1_partition(const S1Spec& spec);

struct BlockInstance {
  RatingsMatrix ratings;
  GroupPartition partition;
  Interval gap;
};
BlockInstance generate_blocks(const BlockSpec& spec, std::uint64_t seed);

/// Majority users grouped by their best majority item (smallest index on ties);
/// round(fraction * |group|) users drawn from each group, at least one overall.
IndexList select_collective(const RatingsMatrix& r, const GroupPartition& p, double fraction,
                            std::uint64_t seed);

struct UserRow {
  Index user = 0;
  std::string id;
  std::string user_class;  // majority | minority
  bool in_collective = false;
  IndexList truthful_items;
  double truthful_welfare = 0.0;
  std::optional<IndexList> collective_items;
  std::optional<double> collective_welfare;
};

struct CollectiveSection {
  std::string kind;  // uprating | general
  Index target_item = 0;
  Index collective_size = 0;
  double eta = 0.0;  // uprating value, or the general strategy's rating
  bool eta_from_finder = false;
  bool simulated = false;  // false when the finder returned 0

  std::optional<FinderInputs> inputs;
  double sigma1_min = 0.0;
  std::optional<Interval> sufficient_gap;
  std::optional<ConditionCheck> conditions;
  std::optional<GeneralSufficiencyReport> general;

  std::vector<double> spectrum;
  Index chosen_rank = 0;
  double social_welfare = 0.0;
  double u_ben = 0.0;
  double u_en = 0.0;
  double rho = 0.0;
  double sw_delta = 0.0;
  double u_en_delta = 0.0;
  std::optional<double> robustness_margin;
  bool margin_heuristic = false;
};

struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string family;
  Index users = 0;
  Index items = 0;
  Index top_k = 1;
  double alpha = 0.0;
  std::vector<std::string> item_ids;

  std::optional<Index> m_bar;
  std::optional<Index> n_bar;
  std::optional<Interval> singular_value_gap;
  std::optional<Interval> popularity_gap_interval;

  std::vector<double> spectrum;
  Index chosen_rank = 0;
  double social_welfare = 0.0;
  double u_ben = 0.0;
  double u_en = 0.0;

  std::optional<CollectiveSection> collective;
  std::vector<UserRow> rows;
};

/// Truthful pass plus, when the scenario carries a strategy, the collective pass.
/// Requires a single alpha (or auto). Errors from the modules are rethrown with the scenario name.
RunReport run(const Scenario& s);
RunReport run(const Scenario& s, const MaterializedScenario& m, double alpha);

/// Alpha used for AlphaAuto on a popularity-gap instance.
double auto_alpha(const MaterializedScenario& m);

struct SweepPoint {
  double alpha = 0.0;
  Index truthful_rank = 0;
  double truthful_welfare = 0.0;
  std::optional<Index> collective_rank;
  std::optional<double> collective_welfare;
  std::optional<double> rho;
  std::optional<double> eta;
};

struct SweepReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string family;
  std::vector<SweepPoint> points;  // ascending alpha
};

/// Evaluates every alpha of the sweep (a single alpha gives one point) on one materialized matrix.
SweepReport sweep(const Scenario& s);

}  // namespace colrec
