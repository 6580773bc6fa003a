#include "colrec/collective.hpp"
#include "colrec/csv.hpp"
#include "colrec/learner.hpp"
#include "colrec/matrix.hpp"
#include "colrec/mc_oracle.hpp"
#include "colrec/popularity_gap.hpp"
#include "colrec/report.hpp"
#include "colrec/scenario.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace colrec;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed (overrides the scenario's)");
  cmd->add_option("--out", c.out, "Output file, or directory for <command>.<format>");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

// --out wins; otherwise COLREC_OUT_DIR; otherwise stdout.
void write_output(const std::string& command, const Common& c, const std::string& content) {
  fs::path target;
  if (!c.out.empty()) {
    target = c.out;
    const char last = c.out.back();
    if (last == '/' || last == '\\' || fs::is_directory(target)) target /= command + "." + c.format;
  } else if (const char* dir = std::getenv("COLREC_OUT_DIR"); dir && *dir) {
    fs::create_directories(dir);
    target = fs::path(dir) / (command + "." + c.format);
  } else {
    std::cout << content;
    return;
  }
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream f(target, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + target.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + target.string() + "'");
}

std::string render(const json& doc, const Common& c) {
  return c.format == "csv" ? flat_csv(doc.dump()) : canonical_json(doc.dump());
}

Scenario scenario_for(const std::string& path, const Common& c) {
  Scenario s = load_scenario(path);
  if (c.seed) s.seed = *c.seed;
  return s;
}

json interval_json(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return {{"lo", i->lo}, {"hi", i->hi}};
}

json inputs_json(const FinderInputs& z) {
  return {{"sigma_kmaj", z.sigma_kmaj}, {"alpha", z.alpha}, {"n_bar", z.n_bar}, {"picky_col_sq", z.picky_col_sq},
          {"av", z.av}, {"kappa", z.kappa}, {"coll_size", z.coll_size}};
}

json conditions_json(const ConditionCheck& c) {
  return {{"eta_in_range", c.eta_in_range}, {"alpha_below_upper", c.alpha_below_upper},
          {"alpha_above_minority", c.alpha_above_minority}, {"slack", c.slack}, {"verdict", c.verdict()}};
}

// ---- generate -------------------------------------------------------------

int cmd_generate(const std::string& config, const Common& c) {
  const Scenario s = scenario_for(config, c);
  const MaterializedScenario m = generate_scenario(s);
  if (c.format == "csv") {
    std::ostringstream out;
    write_ratings_csv(out, m.table, true);
    write_output("generate", c, out.str());
    return 0;
  }
  json doc;
  doc["family"] = m.family;
  doc["seed"] = s.seed;
  doc["user_ids"] = m.table.user_ids;
  doc["item_ids"] = m.table.item_ids;
  json rows = json::array();
  const RatingsMatrix& r = m.table.ratings;
  for (Index u = 0; u < r.users(); ++u) {
    json row = json::array();
    for (Index i = 0; i < r.items(); ++i) row.push_back(r(u, i));
    rows.push_back(std::move(row));
  }
  doc["ratings"] = std::move(rows);
  if (m.partition) {
    doc["partition"] = {{"majority_users", m.partition->majority_users()},
                        {"majority_items", m.partition->majority_items()}};
  }
  if (m.popgap) doc["n_bar"] = m.popgap->n_bar;
  write_output("generate", c, canonical_json(doc.dump()));
  return 0;
}

// ---- run / sweep ----------------------------------------------------------

int cmd_run(const std::string& config, std::optional<double> alpha, const Common& c) {
  Scenario s = scenario_for(config, c);
  if (alpha) s.alpha = *alpha;
  const RunReport rep = run(s);
  write_output("run", c, c.format == "csv" ? to_csv(rep) : to_json(rep));
  return 0;
}

int cmd_sweep(const std::string& config, std::optional<double> from, std::optional<double> to,
              std::optional<double> step, const Common& c) {
  Scenario s = scenario_for(config, c);
  if (from || to || step) {
    AlphaSweep sw;
    if (const auto* cur = std::get_if<AlphaSweep>(&s.alpha)) sw = *cur;
    if (from) sw.from = *from;
    if (to) sw.to = *to;
    if (step) sw.step = *step;
    if (!(sw.step > 0.0) || sw.to < sw.from) throw std::invalid_argument("sweep needs step > 0 and to >= from");
    s.alpha = sw;
  }
  const SweepReport rep = sweep(s);
  write_output("sweep", c, c.format == "csv" ? to_csv(rep) : to_json(rep));
  return 0;
}

// ---- find-eta / robustness -------------------------------------------------

struct InputFlags {
  std::string config;
  std::optional<double> sigma_kmaj, alpha, n_bar, picky_col_sq, av, kappa, coll_size, sigma1_min;
};

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--config", f.config, "Scenario with an uprating strategy; fills every input");
  cmd->add_option("--sigma-kmaj", f.sigma_kmaj, "Smallest nonzero singular value of the majority block");
  cmd->add_option("--alpha", f.alpha, "Exploration limit");
  cmd->add_option("--n-bar", f.n_bar, "Number of majority items");
  cmd->add_option("--picky-sq", f.picky_col_sq, "Squared l2 norm of the target column");
  cmd->add_option("--av", f.av, "Aggregate value of the collective");
  cmd->add_option("--kappa", f.kappa, "Smallest top rating among majority users");
  cmd->add_option("--coll-size", f.coll_size, "Collective size");
  cmd->add_option("--sigma1-min", f.sigma1_min, "Largest singular value of the minority block");
}

struct ResolvedInputs {
  FinderInputs z;
  std::optional<double> sigma1_min;
  std::optional<double> l1, l2;
  std::optional<Index> n;
};

ResolvedInputs resolve_inputs(const InputFlags& f, const Common& c) {
  ResolvedInputs out;
  if (!f.config.empty()) {
    Scenario s = scenario_for(f.config, c);
    const auto* up = s.strategy ? std::get_if<UpratingSpec>(&*s.strategy) : nullptr;
    if (!up) throw std::invalid_argument("scenario needs an uprating strategy");
    if (!std::holds_alternative<double>(s.alpha)) throw std::invalid_argument("scenario needs a single numeric alpha");
    const MaterializedScenario m = generate_scenario(s);
    if (!m.partition) throw std::invalid_argument("scenario source has no majority-minority partition");
    const RatingsMatrix& r = m.table.ratings;
    CollectiveStrategy st;
    if (up->target_item) {
      st.target_item = *up->target_item;
    } else {
      const auto picky = find_picky_items(r, *m.partition);
      if (picky.empty()) throw std::invalid_argument("no picky item to target");
      st.target_item = picky.front().item;
    }
    st.collective = select_collective(r, *m.partition, up->fraction, s.seed);
    st.eta = 1.0;
    out.z = finder_inputs(r, *m.partition, st, std::get<double>(s.alpha), s.top_k);
    out.sigma1_min = minority_sigma1(r, *m.partition);
    out.l1 = matrix_l1_norm(r);
    out.l2 = spectral_norm(r);
    out.n = r.items();
  }
  auto set = [](double& dst, const std::optional<double>& v, bool have_base, const char* flag) {
    if (v) dst = *v;
    else if (!have_base) throw std::invalid_argument(std::string("missing ") + flag + " (or --config)");
  };
  const bool base = !f.config.empty();
  set(out.z.sigma_kmaj, f.sigma_kmaj, base, "--sigma-kmaj");
  set(out.z.alpha, f.alpha, base, "--alpha");
  set(out.z.n_bar, f.n_bar, base, "--n-bar");
  set(out.z.picky_col_sq, f.picky_col_sq, base, "--picky-sq");
  set(out.z.av, f.av, base, "--av");
  set(out.z.kappa, f.kappa, base, "--kappa");
  set(out.z.coll_size, f.coll_size, base, "--coll-size");
  if (f.sigma1_min) out.sigma1_min = f.sigma1_min;
  return out;
}

int cmd_find_eta(const InputFlags& f, const Common& c) {
  const ResolvedInputs in = resolve_inputs(f, c);
  const double eta = find_eta(in.z);
  json doc;
  doc["inputs"] = inputs_json(in.z);
  doc["eta"] = eta;
  doc["found"] = eta > 0.0;
  doc["slack"] = sufficiency_slack(in.z, eta);
  if (in.sigma1_min) {
    doc["sigma1_min"] = *in.sigma1_min;
    doc["conditions"] = conditions_json(check_sufficient_conditions(in.z, *in.sigma1_min, eta));
    doc["sufficient_gap"] = interval_json(sufficient_gap(in.z, *in.sigma1_min, eta));
  }
  write_output("find-eta", c, render(doc, c));
  return 0;
}

int cmd_robustness(const InputFlags& f, std::optional<double> eta_flag, std::optional<double> l1_flag,
                   std::optional<double> l2_flag, std::optional<Index> n_flag, Index trials, const Common& c) {
  const ResolvedInputs in = resolve_inputs(f, c);
  const bool estimated = !f.config.empty() ? (l1_flag || l2_flag || n_flag) : true;
  const double l1 = l1_flag ? *l1_flag : in.l1.value_or(NAN);
  const double l2 = l2_flag ? *l2_flag : in.l2.value_or(NAN);
  if (!std::isfinite(l1) || !std::isfinite(l2)) throw std::invalid_argument("missing --l1/--l2 (or --config)");
  if (!n_flag && !in.n) throw std::invalid_argument("missing --n (or --config)");
  const Index n = n_flag ? *n_flag : *in.n;
  const double eta = eta_flag ? *eta_flag : find_eta(in.z);
  if (!(eta > 0.0)) throw std::domain_error("the finder returned 0; there is no effective eta to protect");

  const double margin = robustness_margin(in.z, eta, l1, l2, n);
  json doc;
  doc["inputs"] = inputs_json(in.z);
  doc["eta"] = eta;
  doc["l1_norm"] = l1;
  doc["l2_norm"] = l2;
  doc["n"] = n;
  doc["f"] = sufficiency_slack(in.z, eta);
  doc["lipschitz"] = lipschitz_bound(eta, l1, l2, n);
  doc["margin"] = margin;
  doc["heuristic"] = estimated;
  if (trials > 0) {
    const auto pts = random_perturbations(in.z, margin * (1.0 - 1e-6), trials, c.seed.value_or(0));
    Index pass = 0;
    for (const FinderInputs& p : pts) pass += eta_effective(p, eta) ? 1 : 0;
    doc["perturbation_trials"] = {{"count", trials}, {"effective", pass}};
  }
  write_output("robustness", c, render(doc, c));
  return 0;
}

// ---- check ----------------------------------------------------------------

int cmd_check(const std::string& config, const Common& c) {
  const Scenario s = scenario_for(config, c);
  const MaterializedScenario m = generate_scenario(s);
  const RatingsMatrix& r = m.table.ratings;
  json doc;
  doc["family"] = m.family;
  doc["shape"] = {{"users", r.users()}, {"items", r.items()}};
  doc["spectrum"] = [&] {
    const SpectralSummary sp = spectral(r);
    return json{{"singular_values", std::vector<double>(sp.singular_values.data(),
                                                        sp.singular_values.data() + sp.singular_values.size())},
                {"numeric_rank", sp.numeric_rank}};
  }();
  if (m.partition) {
    const GroupPartition& p = *m.partition;
    const std::string violation = p.violation(r);
    json part = {{"m_bar", p.m_bar()}, {"n_bar", p.n_bar()}, {"valid", violation.empty()}};
    if (!violation.empty()) part["violation"] = violation;
    doc["partition"] = part;
    doc["singular_value_gap"] = interval_json(singular_value_gap(r, p));
    json picky = json::array();
    for (const PickyItem& pi : find_picky_items(r, p)) {
      picky.push_back({{"item", m.table.item_ids[pi.item]}, {"users", pi.users.size()}});
    }
    doc["picky_items"] = picky;
  }
  if (m.popgap) {
    const Index n_bar = m.popgap->n_bar;
    const ClassMembershipReport cls = class_membership(r, n_bar);
    const SingularBoundsCheck sb = singular_bounds_check(r, n_bar);
    const DeltaInterval di = delta_interval(r, n_bar);
    const NoLargerNbarCheck nl = no_larger_nbar_check(r, n_bar);
    json pg = {{"n_bar", n_bar},
               {"in_class", cls.in_class},
               {"groups_assumption", cls.groups_assumption()},
               {"kappa", cls.kappa},
               {"popular_sigma", cls.popular_sigma},
               {"f3_margin", cls.f3_margin},
               {"f4_margin", cls.f4_margin},
               {"majority_users", cls.majority_users.size()},
               {"minority_users", cls.minority_users.size()},
               {"singular_bounds", {{"sigma_nbar", sb.sigma_nbar}, {"sigma_next", sb.sigma_next},
                                    {"lower_bound", sb.lower_bound}, {"upper_bound", sb.upper_bound},
                                    {"lower_holds", sb.lower_holds}, {"upper_holds", sb.upper_holds}}},
               {"projection_gap", projection_gap(r, n_bar)},
               {"projection_gap_bound", projection_gap_bound(r, n_bar)},
               {"delta_interval", {{"lo", di.lo}, {"hi", di.hi}, {"holds", di.holds()}}},
               {"gap_interval", interval_json(gap_interval_F(r, n_bar))},
               {"no_larger_nbar", {{"premise", nl.premise}, {"larger_in_class", nl.larger_in_class}}}};
    if (cls.delta_gap) pg["delta_gap"] = *cls.delta_gap;
    if (!cls.reason.empty()) pg["reason"] = cls.reason;
    doc["popularity_gap"] = pg;
  }
  if (s.strategy && !std::holds_alternative<AlphaSweep>(s.alpha)) {
    const RunReport rep = run(s);
    const CollectiveSection& col = *rep.collective;
    json st = {{"kind", col.kind}, {"eta", col.eta}, {"alpha", rep.alpha}};
    if (col.conditions) {
      st["conditions"] = conditions_json(*col.conditions);
      st["inputs"] = inputs_json(*col.inputs);
      st["sufficient_gap"] = interval_json(col.sufficient_gap);
    }
    if (col.general) {
      const GeneralSufficiencyReport& g = *col.general;
      st["preconditions"] = g.preconditions();
      st["conditions"] = g.conditions();
      st["verdict"] = g.verdict();
      if (!g.precondition_failure.empty()) st["precondition_failure"] = g.precondition_failure;
    }
    doc["strategy"] = st;
  }
  write_output("check", c, render(doc, c));
  return 0;
}

// ---- mc-demo --------------------------------------------------------------

Matrix read_dense(const fs::path& file) {
  return read_ratings_csv_file(file.string()).ratings.values();
}

PartialMatrix read_partial(const fs::path& file, Index users, Index items) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open fixture '" + file.string() + "'");
  return read_partial_csv(in, users, items);
}

int cmd_mc_demo(const std::string& fixtures, Index q, Index trials, const Common& c) {
  const fs::path dir(fixtures);
  json doc;

  {
    const PartialMatrix partial = read_partial(dir / "c11_partial.csv", 4, 4);
    const Matrix completion = read_dense(dir / "c11_completion.csv");
    const GroupPartition all = GroupPartition::leading_blocks(4, 4, 4, 4);
    const Matrix built = sparsest_majority_completion(partial, all, completion);
    doc["c11"] = {{"observed", partial.observed().size()},
                  {"completion_feasible", partial.feasible(completion)},
                  {"completion_rank", numeric_rank(completion)},
                  {"constructed_equals_completion", built == completion}};
  }
  {
    const PartialMatrix partial = read_partial(dir / "c15_partial.csv", 6, 6);
    const Matrix sparse = read_dense(dir / "c15_completion.csv");
    const Matrix alt = read_dense(dir / "c15_alternative.csv");
    const GroupPartition p = GroupPartition::leading_blocks(6, 6, 3, 3);
    const Matrix reduced = reduce_solution(alt, p);
    doc["c15"] = {{"observed", partial.observed().size()},
                  {"hypothesis_holds", [&] {
                     const ObservedSet omega = partial.observed();
                     for (const auto& [u, i] : omega.pairs()) {
                       if (!p.is_majority_user(u) && !p.is_majority_item(i) && partial.value(u, i) != 0.0) return false;
                     }
                     return true;
                   }()},
                  {"sparse_feasible", partial.feasible(sparse)},
                  {"sparse_rank", numeric_rank(sparse)},
                  {"alternative_feasible", partial.feasible(alt)},
                  {"alternative_rank", numeric_rank(alt)},
                  {"reduced_equals_sparse", reduced == sparse},
                  {"reduced_rank", numeric_rank(reduced)}};
  }
  {
    const RatingsMatrix r(read_dense(dir / "c13_ratings.csv"));
    const GroupPartition p = GroupPartition::leading_blocks(10, 10, 8, 8);
    const std::uint64_t seed = c.seed.value_or(0);
    Index misses = 0;
    for (Index t = 0; t < trials; ++t) {
      const ObservedSet omega = explore_per_user(10, 10, q, seed * 0x9E3779B97F4A7C15ULL + t);
      misses += omega_satisfies_prop22(omega, r, p) ? 1 : 0;
    }
    const double expected = std::pow((10.0 - static_cast<double>(q)) / 10.0, 2.0);
    const double empirical = trials ? static_cast<double>(misses) / static_cast<double>(trials) : 0.0;
    const double sd = trials ? std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials)) : 0.0;
    doc["c13"] = {{"q", q},
                  {"trials", trials},
                  {"miss_probability", empirical},
                  {"closed_form", expected},
                  {"std_error", sd},
                  {"within_3_sigma", std::abs(empirical - expected) <= 3.0 * sd}};
  }
  write_output("mc-demo", c, render(doc, c));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate collective uprating against a truncated-SVD recommender"};
  app.require_subcommand(1);

  Common common;
  std::string config;

  auto* gen = app.add_subcommand("generate", "Materialize a scenario's ratings matrix");
  gen->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_common(gen, common);

  std::optional<double> run_alpha;
  auto* run_cmd = app.add_subcommand("run", "Truthful and collective runs of one scenario");
  run_cmd->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--alpha", run_alpha, "Override the scenario's alpha");
  add_common(run_cmd, common);

  std::optional<double> from, to, step;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate a scenario over an alpha grid");
  sweep_cmd->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--from", from, "First alpha");
  sweep_cmd->add_option("--to", to, "Last alpha");
  sweep_cmd->add_option("--step", step, "Alpha step");
  add_common(sweep_cmd, common);

  InputFlags inputs;
  auto* eta_cmd = app.add_subcommand("find-eta", "Run the effective eta finder");
  add_input_flags(eta_cmd, inputs);
  add_common(eta_cmd, common);

  std::optional<double> eta, l1, l2;
  std::optional<Index> n;
  Index trials = 100;
  auto* rob_cmd = app.add_subcommand("robustness", "Misspecification margin of an eta");
  add_input_flags(rob_cmd, inputs);
  rob_cmd->add_option("--eta", eta, "Uprating value (default: finder output)");
  rob_cmd->add_option("--l1", l1, "Max column sum of R*");
  rob_cmd->add_option("--l2", l2, "Spectral norm of R*");
  rob_cmd->add_option("--n", n, "Number of items");
  rob_cmd->add_option("--trials", trials, "Random perturbations inside the margin to test");
  add_common(rob_cmd, common);

  auto* check_cmd = app.add_subcommand("check", "Structural checks and sufficient conditions");
  check_cmd->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_common(check_cmd, common);

  std::string fixtures = COLREC_FIXTURE_DIR;
  Index q = 5;
  Index mc_trials = 100000;
  auto* mc_cmd = app.add_subcommand("mc-demo", "Matrix-completion worked examples and sampling check");
  mc_cmd->add_option("--fixtures", fixtures, "Directory holding the fixture CSVs")->check(CLI::ExistingDirectory);
  mc_cmd->add_option("--q", q, "Items sampled per user")->check(CLI::Range(0, 10));
  mc_cmd->add_option("--trials", mc_trials, "Monte Carlo trials");
  add_common(mc_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(config, common);
    if (*run_cmd) return cmd_run(config, run_alpha, common);
    if (*sweep_cmd) return cmd_sweep(config, from, to, step, common);
    if (*eta_cmd) return cmd_find_eta(inputs, common);
    if (*rob_cmd) return cmd_robustness(inputs, eta, l1, l2, n, trials, common);
    if (*check_cmd) return cmd_check(config, common);
    if (*mc_cmd) return cmd_mc_demo(fixtures, q, mc_trials, common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "colrec: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "colrec: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
