#include "colrec/scenario.hpp"

#include "rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace colrec {

namespace {

using nlohmann::json;

Eigen::Index ei(Index v) { return static_cast<Eigen::Index>(v); }

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw std::invalid_argument("scenario: '" + where + "' " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad(where + "." + key, "is not a recognised key");
    }
  }
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad(where + "." + key, "must be a number");
  return v.get<double>();
}

Index count(const json& obj, const char* key, const std::string& where, Index fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad(where + "." + key, "must be a nonnegative integer");
  }
  return v.get<Index>();
}

MatrixSource parse_source(const json& src) {
  const std::string where = "source";
  if (!src.is_object() || !src.contains("family") || !src.at("family").is_string()) {
    bad(where, "needs a string 'family'");
  }
  const std::string family = src.at("family").get<std::string>();
  if (family == "d2") {
    only_keys(src, where, {"family", "m_maj", "m_minor"});
    D2Spec d;
    d.m_maj = count(src, "m_maj", where, d.m_maj);
    d.m_minor = count(src, "m_minor", where, d.m_minor);
    return d;
  }
  if (family == "s1") {
    only_keys(src, where, {"family", "popular_items", "group_size", "picky_users", "niche_users"});
    S1Spec s;
    s.popular_items = count(src, "popular_items", where, s.popular_items);
    s.group_size = count(src, "group_size", where, s.group_size);
    s.picky_users = count(src, "picky_users", where, s.picky_users);
    s.niche_users = count(src, "niche_users", where, s.niche_users);
    return s;
  }
  if (family == "blocks") {
    only_keys(src, where, {"family", "popular_items", "group_min", "group_max", "minority_items",
                           "minority_group_max", "off_max"});
    BlockSpec b;
    b.popular_items = count(src, "popular_items", where, b.popular_items);
    b.group_min = count(src, "group_min", where, b.group_min);
    b.group_max = count(src, "group_max", where, b.group_max);
    b.minority_items = count(src, "minority_items", where, b.minority_items);
    b.minority_group_max = count(src, "minority_group_max", where, b.minority_group_max);
    b.off_max = number(src, "off_max", where, b.off_max);
    return b;
  }
  if (family == "popgap") {
    only_keys(src, where, {"family", "n_bar", "n_unpopular", "group_min", "group_max", "switch_users",
                           "other_minority", "majority_off_max"});
    PopGapSpec p;
    p.n_bar = count(src, "n_bar", where, p.n_bar);
    p.n_unpopular = count(src, "n_unpopular", where, p.n_unpopular);
    p.group_min = count(src, "group_min", where, p.group_min);
    p.group_max = count(src, "group_max", where, p.group_max);
    p.switch_users = count(src, "switch_users", where, p.switch_users);
    p.other_minority = count(src, "other_minority", where, p.other_minority);
    p.majority_off_max = number(src, "majority_off_max", where, p.majority_off_max);
    return p;
  }
  if (family == "csv") {
    only_keys(src, where, {"family", "path", "majority_items"});
    CsvSource c;
    if (!src.contains("path") || !src.at("path").is_string()) bad(where + ".path", "must be a string");
    c.path = src.at("path").get<std::string>();
    if (!src.contains("majority_items") || !src.at("majority_items").is_array()) {
      bad(where + ".majority_items", "must be an array of item ids");
    }
    for (const json& id : src.at("majority_items")) {
      if (id.is_string()) c.majority_items.push_back(id.get<std::string>());
      else if (id.is_number_integer()) c.majority_items.push_back(std::to_string(id.get<std::int64_t>()));
      else bad(where + ".majority_items", "entries must be strings or integers");
    }
    return c;
  }
  bad(where + ".family", "must be one of d2, s1, blocks, popgap, csv");
}

AlphaSetting parse_alpha(const json& a) {
  if (a.is_number()) return a.get<double>();
  if (a.is_string() && a.get<std::string>() == "auto") return AlphaAuto{};
  if (a.is_object()) {
    only_keys(a, "alpha", {"from", "to", "step"});
    AlphaSweep s{number(a, "from", "alpha", 0.0), number(a, "to", "alpha", 0.0), number(a, "step", "alpha", 0.0)};
    if (!(s.step > 0.0) || !(s.to >= s.from)) bad("alpha", "sweep needs step > 0 and to >= from");
    return s;
  }
  bad("alpha", "must be a number, \"auto\" or {from, to, step}");
}

StrategySpec parse_strategy(const json& st) {
  const std::string where = "strategy";
  if (!st.is_object() || !st.contains("kind") || !st.at("kind").is_string()) bad(where, "needs a string 'kind'");
  const std::string kind = st.at("kind").get<std::string>();
  if (kind == "uprating") {
    only_keys(st, where, {"kind", "target_item", "fraction", "eta"});
    UpratingSpec u;
    if (st.contains("target_item")) u.target_item = count(st, "target_item", where, 0);
    u.fraction = number(st, "fraction", where, u.fraction);
    if (st.contains("eta")) {
      const json& e = st.at("eta");
      if (e.is_number()) u.eta = e.get<double>();
      else if (!(e.is_string() && e.get<std::string>() == "auto")) bad(where + ".eta", "must be a number or \"auto\"");
    }
    if (!(u.fraction > 0.0 && u.fraction <= 1.0)) bad(where + ".fraction", "must lie in (0, 1]");
    return u;
  }
  if (kind == "general") {
    only_keys(st, where, {"kind", "fraction", "value"});
    GeneralSpec g;
    g.fraction = number(st, "fraction", where, g.fraction);
    g.value = number(st, "value", where, g.value);
    return g;
  }
  bad(where + ".kind", "must be uprating or general");
}

template <class F>
auto with_context(const std::string& name, F&& f) -> decltype(f()) {
  const std::string prefix = "scenario '" + name + "': ";
  try {
    return f();
  } catch (const std::domain_error& e) {
    throw std::domain_error(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(prefix + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

RatingsTable load_csv_source(const CsvSource& c, std::optional<GroupPartition>& partition) {
  RatingsTable t = read_ratings_csv_file(c.path);
  IndexList items;
  for (const std::string& id : c.majority_items) {
    const auto it = std::find(t.item_ids.begin(), t.item_ids.end(), id);
    if (it == t.item_ids.end()) throw std::invalid_argument("majority item '" + id + "' not in " + c.path);
    items.push_back(static_cast<Index>(it - t.item_ids.begin()));
  }
  IndexList users;
  for (Index u = 0; u < t.ratings.users(); ++u) {
    for (Index i : items) {
      if (t.ratings(u, i) > 0.0) {
        users.push_back(u);
        break;
      }
    }
  }
  partition = GroupPartition::from_majority(t.ratings.users(), t.ratings.items(), users, items);
  partition->validate(t.ratings);
  return t;
}

}  // namespace

std::vector<double> AlphaSweep::values() const {
  std::vector<double> out;
  for (Index j = 0;; ++j) {
    const double a = from + static_cast<double>(j) * step;
    if (a > to + 1e-12) break;
    out.push_back(a);
  }
  return out;
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: not valid JSON: ") + e.what());
  }
  only_keys(doc, "scenario", {"name", "seed", "source", "alpha", "strategy", "top_k", "tie_break"});
  Scenario s;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) bad("name", "must be a string");
    s.name = doc.at("name").get<std::string>();
  }
  if (!doc.contains("seed")) bad("seed", "is mandatory");
  if (!doc.at("seed").is_number_unsigned()) bad("seed", "must be a nonnegative integer");
  s.seed = doc.at("seed").get<std::uint64_t>();
  if (!doc.contains("source")) bad("source", "is mandatory");
  s.source = parse_source(doc.at("source"));
  if (doc.contains("alpha")) s.alpha = parse_alpha(doc.at("alpha"));
  if (doc.contains("strategy") && !doc.at("strategy").is_null()) s.strategy = parse_strategy(doc.at("strategy"));
  s.top_k = count(doc, "top_k", "scenario", s.top_k);
  if (s.top_k == 0) bad("top_k", "must be at least 1");
  if (doc.contains("tie_break")) {
    const json& t = doc.at("tie_break");
    if (t == "seeded") s.tie_break = TieBreak::Mode::seeded;
    else if (t == "lexicographic") s.tie_break = TieBreak::Mode::lexicographic;
    else bad("tie_break", "must be seeded or lexicographic");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (auto* c = std::get_if<CsvSource>(&s.source)) {
    const std::filesystem::path p(c->path);
    if (p.is_relative()) c->path = (std::filesystem::path(path).parent_path() / p).string();
  }
  return s;
}

RatingsMatrix generate_d2(const D2Spec& spec) {
  if (spec.m_maj == 0 || spec.m_minor == 0) throw std::invalid_argument("d2 groups must be nonempty");
  const Index m = 2 * spec.m_maj + 2 * spec.m_minor;
  Matrix v = Matrix::Zero(ei(m), 4);
  Index row = 0;
  const Index sizes[4] = {spec.m_maj, spec.m_maj, spec.m_minor, spec.m_minor};
  for (Index item = 0; item < 4; ++item)
    for (Index k = 0; k < sizes[item]; ++k) v(ei(row++), ei(item)) = 1.0;
  return RatingsMatrix(std::move(v));
}

GroupPartition d2_partition(const D2Spec& spec) {
  const Index m = 2 * spec.m_maj + 2 * spec.m_minor;
  return GroupPartition::leading_blocks(m, 4, 2 * spec.m_maj, 2);
}

RatingsMatrix generate_s1(const S1Spec& spec) {
  if (spec.popular_items == 0 || spec.group_size == 0 || spec.picky_users == 0 || spec.niche_users == 0) {
    throw std::invalid_argument("s1 groups must be nonempty");
  }
  const Index n = spec.popular_items + 2;
  const Index m = spec.popular_items * spec.group_size + spec.picky_users + spec.niche_users;
  Matrix v = Matrix::Zero(ei(m), ei(n));
  Index row = 0;
  for (Index item = 0; item < spec.popular_items; ++item)
    for (Index k = 0; k < spec.group_size; ++k) v(ei(row++), ei(item)) = 1.0;
  for (Index k = 0; k < spec.picky_users; ++k) v(ei(row++), ei(spec.popular_items)) = 1.0;
  for (Index k = 0; k < spec.niche_users; ++k) v(ei(row++), ei(spec.popular_items + 1)) = 1.0;
  return RatingsMatrix(std::move(v));
}

GroupPartition s1_partition(const S1Spec& spec) {
  const Index m = spec.popular_items * spec.group_size + spec.picky_users + spec.niche_users;
  return GroupPartition::leading_blocks(m, spec.popular_items + 2, spec.popular_items * spec.group_size,
                                        spec.popular_items);
}

BlockInstance generate_blocks(const BlockSpec& spec, std::uint64_t seed) {
  if (spec.popular_items == 0 || spec.minority_items == 0) throw std::invalid_argument("blocks need both item groups");
  if (spec.group_min == 0 || spec.group_max < spec.group_min || spec.minority_group_max == 0) {
    throw std::invalid_argument("blocks group size range is empty");
  }
  if (!(spec.off_max >= 0.0 && spec.off_max < 1.0)) throw std::invalid_argument("off_max must lie in [0, 1)");
  std::mt19937_64 gen = detail::make_engine({seed, 0x626c6f636b73ULL});
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::vector<Index> sizes;
    for (Index i = 0; i < spec.popular_items; ++i) {
      sizes.push_back(spec.group_min + detail::uniform_below(gen, spec.group_max - spec.group_min + 1));
    }
    for (Index i = 0; i < spec.minority_items; ++i) sizes.push_back(1 + detail::uniform_below(gen, spec.minority_group_max));
    Index m_maj = 0;
    for (Index i = 0; i < spec.popular_items; ++i) m_maj += sizes[i];
    Index m = m_maj;
    for (Index i = spec.popular_items; i < sizes.size(); ++i) m += sizes[i];
    const Index n = spec.popular_items + spec.minority_items;

    Matrix v = Matrix::Zero(ei(m), ei(n));
    Index row = 0;
    for (Index item = 0; item < n; ++item) {
      for (Index k = 0; k < sizes[item]; ++k, ++row) {
        if (item < spec.popular_items) {
          for (Index j = 0; j < spec.popular_items; ++j) {
            v(ei(row), ei(j)) = j == item ? 1.0 : detail::uniform_real(gen, 0.0, spec.off_max);
          }
        } else {
          v(ei(row), ei(item)) = detail::uniform_real(gen, 0.5, 1.0);
        }
      }
    }
    RatingsMatrix r(std::move(v));
    GroupPartition p = GroupPartition::leading_blocks(m, n, m_maj, spec.popular_items);
    if (auto gap = singular_value_gap(r, p)) return {std::move(r), std::move(p), *gap};
  }
  throw std::runtime_error("no block instance with a singular value gap found for this spec");
}

IndexList select_collective(const RatingsMatrix& r, const GroupPartition& p, double fraction,
                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("collective fraction must lie in (0, 1]");
  if (p.n_bar() == 0) throw std::invalid_argument("partition has no majority items");
  std::map<Index, IndexList> groups;
  for (Index u : p.majority_users()) {
    Index best = p.majority_items().front();
    for (Index i : p.majority_items()) {
      if (r(u, i) > r(u, best)) best = i;
    }
    groups[best].push_back(u);
  }
  IndexList out;
  for (auto& [item, users] : groups) {
    const auto take = std::min<Index>(users.size(), static_cast<Index>(std::llround(fraction * static_cast<double>(users.size()))));
    std::mt19937_64 gen = detail::make_engine({seed, item, 0x636f6c6cULL});
    for (Index a = 0; a < take; ++a) {
      std::swap(users[a], users[a + detail::uniform_below(gen, users.size() - a)]);
      out.push_back(users[a]);
    }
  }
  if (out.empty()) throw std::invalid_argument("collective selector picked no users");
  std::sort(out.begin(), out.end());
  return out;
}

MaterializedScenario generate_scenario(const Scenario& s) {
  return with_context(s.name, [&] {
    MaterializedScenario m;
    std::visit(
        [&](const auto& src) {
          using T = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<T, D2Spec>) {
            m.family = "d2";
            m.table = with_index_ids(generate_d2(src));
            m.partition = d2_partition(src);
          } else if constexpr (std::is_same_v<T, S1Spec>) {
            m.family = "s1";
            m.table = with_index_ids(generate_s1(src));
            m.partition = s1_partition(src);
          } else if constexpr (std::is_same_v<T, BlockSpec>) {
            m.family = "blocks";
            BlockInstance b = generate_blocks(src, s.seed);
            m.table = with_index_ids(std::move(b.ratings));
            m.partition = std::move(b.partition);
          } else if constexpr (std::is_same_v<T, PopGapSpec>) {
            m.family = "popgap";
            m.popgap = generate_popgap(src, s.seed);
            m.table = with_index_ids(m.popgap->ratings);
          } else {
            m.family = "csv";
            m.table = load_csv_source(src, m.partition);
          }
        },
        s.source);
    if (m.partition) m.partition->validate(m.table.ratings);
    return m;
  });
}

double auto_alpha(const MaterializedScenario& m) {
  if (!m.popgap) throw std::invalid_argument("alpha \"auto\" needs a popgap source");
  const auto gap = gap_interval_F(m.popgap->ratings, m.popgap->n_bar);
  if (!gap) throw std::domain_error("popularity gap interval is empty");
  return gap->lo + 0.05 * gap->width();
}

namespace {

CollectiveSection run_uprating(const Scenario& s, const MaterializedScenario& m, const UpratingSpec& spec,
                               double alpha, std::vector<UserRow>& rows) {
  if (!m.partition) throw std::invalid_argument("uprating needs a majority-minority source");
  const RatingsMatrix& r = m.table.ratings;
  const GroupPartition& p = *m.partition;
  CollectiveStrategy strat;
  if (spec.target_item) {
    strat.target_item = *spec.target_item;
  } else {
    const auto picky = find_picky_items(r, p);
    if (picky.empty()) throw std::invalid_argument("no picky item to target");
    strat.target_item = picky.front().item;
  }
  strat.collective = select_collective(r, p, spec.fraction, s.seed);
  strat.eta = 1.0;  // placeholder so validation passes while reading the inputs
  validate_strategy(strat, p);

  CollectiveSection c;
  c.kind = "uprating";
  c.target_item = strat.target_item;
  c.collective_size = strat.collective.size();
  c.inputs = finder_inputs(r, p, strat, alpha, s.top_k);
  c.sigma1_min = minority_sigma1(r, p);
  c.eta_from_finder = !spec.eta.has_value();
  c.eta = spec.eta ? *spec.eta : find_eta(*c.inputs);
  c.conditions = check_sufficient_conditions(*c.inputs, c.sigma1_min, c.eta);
  c.sufficient_gap = sufficient_gap(*c.inputs, c.sigma1_min, c.eta);
  for (Index u : strat.collective) rows[u].in_collective = true;
  if (!(c.eta > 0.0)) return c;

  strat.eta = c.eta;
  const SufficiencyReport rep = evaluate_collective(r, p, strat, alpha, s.top_k, TieBreak{s.tie_break, s.seed});
  c.simulated = true;
  c.spectrum = to_std(rep.collective_model.revealed_spectrum.singular_values);
  c.chosen_rank = rep.collective_model.chosen_rank;
  c.social_welfare = rep.sw_after;
  c.u_ben = rep.collective_welfare.u_ben;
  c.u_en = rep.collective_welfare.u_en.value_or(0.0);
  c.rho = rep.rho;
  c.sw_delta = rep.sw_after - rep.sw_before;
  if (c.conditions->slack > 0.0) {
    c.robustness_margin = robustness_margin(*c.inputs, c.eta, matrix_l1_norm(r), spectral_norm(r), r.items());
  }
  for (Index u = 0; u < r.users(); ++u) {
    rows[u].collective_items = rep.collective_outcome.users[u].chosen;
    rows[u].collective_welfare = rep.collective_welfare.per_user_welfare[u];
  }
  return c;
}

CollectiveSection run_general(const Scenario& s, const MaterializedScenario& m, const GeneralSpec& spec,
                              double alpha, double sw_before, std::vector<UserRow>& rows) {
  if (!m.popgap) throw std::invalid_argument("general strategies need a popgap source");
  const PopGapInstance& inst = *m.popgap;
  const RatingsMatrix& r = inst.ratings;
  const Vector r_tilde = draw_general_strategy(inst, spec.fraction, spec.value, s.seed);
  const RatingsMatrix revealed = apply_general_strategy(r, inst.n_bar, r_tilde);

  CollectiveSection c;
  c.kind = "general";
  c.target_item = inst.n_bar;
  c.eta = spec.value;
  for (Index u = 0; u < r.users(); ++u) {
    if (r_tilde(ei(u)) != r(u, inst.n_bar)) {
      ++c.collective_size;
      rows[u].in_collective = true;
    }
  }
  c.general = check_general_sufficiency(r, inst.n_bar, r_tilde, alpha);

  const LearnerModel model = fit_learner(revealed, alpha);
  const RecommendationOutcome out =
      recommend(model.truncated, s.top_k, TieBreak{s.tie_break, s.seed}, model.revealed_spectrum.sigma(1));
  const WelfareReport w = social_welfare(r, revealed, out);
  if (!(sw_before > 0.0)) throw std::domain_error("truthful social welfare is zero");
  c.simulated = true;
  c.spectrum = to_std(model.revealed_spectrum.singular_values);
  c.chosen_rank = model.chosen_rank;
  c.social_welfare = w.social_welfare;
  c.u_ben = w.u_ben;
  c.u_en = w.u_en.value_or(0.0);
  c.rho = w.social_welfare / sw_before;
  c.sw_delta = w.social_welfare - sw_before;
  for (Index u = 0; u < r.users(); ++u) {
    rows[u].collective_items = out.users[u].chosen;
    rows[u].collective_welfare = w.per_user_welfare[u];
  }
  return c;
}

}  // namespace

RunReport run(const Scenario& s, const MaterializedScenario& m, double alpha) {
  return with_context(s.name, [&] {
    const RatingsMatrix& r = m.table.ratings;
    RunReport rep;
    rep.name = s.name;
    rep.seed = s.seed;
    rep.family = m.family;
    rep.users = r.users();
    rep.items = r.items();
    rep.top_k = s.top_k;
    rep.alpha = alpha;
    rep.item_ids = m.table.item_ids;

    std::vector<bool> majority(r.users(), false);
    if (m.partition) {
      rep.m_bar = m.partition->m_bar();
      rep.n_bar = m.partition->n_bar();
      rep.singular_value_gap = singular_value_gap(r, *m.partition);
      for (Index u : m.partition->majority_users()) majority[u] = true;
    } else if (m.popgap) {
      rep.n_bar = m.popgap->n_bar;
      rep.popularity_gap_interval = gap_interval_F(r, m.popgap->n_bar);
      const auto classes = classify_users(r, m.popgap->n_bar);
      for (Index u = 0; u < r.users(); ++u) majority[u] = classes[u].majority;
    }

    const LearnerModel model = fit_learner(r, alpha);
    const RecommendationOutcome out =
        recommend(model.truncated, s.top_k, TieBreak{s.tie_break, s.seed}, model.revealed_spectrum.sigma(1));
    const WelfareReport w = social_welfare(r, r, out);
    rep.spectrum = to_std(model.revealed_spectrum.singular_values);
    rep.chosen_rank = model.chosen_rank;
    rep.social_welfare = w.social_welfare;
    rep.u_ben = w.u_ben;
    rep.u_en = w.u_en.value_or(0.0);

    rep.rows.resize(r.users());
    for (Index u = 0; u < r.users(); ++u) {
      UserRow& row = rep.rows[u];
      row.user = u;
      row.id = m.table.user_ids[u];
      row.user_class = majority[u] ? "majority" : "minority";
      row.truthful_items = out.users[u].chosen;
      row.truthful_welfare = w.per_user_welfare[u];
    }

    if (s.strategy) {
      if (const auto* up = std::get_if<UpratingSpec>(&*s.strategy)) {
        rep.collective = run_uprating(s, m, *up, alpha, rep.rows);
      } else {
        rep.collective = run_general(s, m, std::get<GeneralSpec>(*s.strategy), alpha, w.social_welfare, rep.rows);
      }
      if (rep.collective->simulated) rep.collective->u_en_delta = rep.collective->u_en - rep.u_en;
    }
    return rep;
  });
}

RunReport run(const Scenario& s) {
  const MaterializedScenario m = generate_scenario(s);
  if (std::holds_alternative<AlphaSweep>(s.alpha)) {
    throw std::invalid_argument("scenario '" + s.name + "': run needs a single alpha; use sweep");
  }
  const double alpha = std::holds_alternative<double>(s.alpha)
                           ? std::get<double>(s.alpha)
                           : with_context(s.name, [&] { return auto_alpha(m); });
  return run(s, m, alpha);
}

SweepReport sweep(const Scenario& s) {
  const MaterializedScenario m = generate_scenario(s);
  std::vector<double> alphas;
  if (const auto* sw = std::get_if<AlphaSweep>(&s.alpha)) alphas = sw->values();
  else if (const auto* a = std::get_if<double>(&s.alpha)) alphas = {*a};
  else alphas = {with_context(s.name, [&] { return auto_alpha(m); })};

  SweepReport rep;
  rep.name = s.name;
  rep.seed = s.seed;
  rep.family = m.family;
  for (double alpha : alphas) {
    const RunReport r = run(s, m, alpha);
    SweepPoint pt;
    pt.alpha = alpha;
    pt.truthful_rank = r.chosen_rank;
    pt.truthful_welfare = r.social_welfare;
    if (r.collective) {
      pt.eta = r.collective->eta;
      if (r.collective->simulated) {
        pt.collective_rank = r.collective->chosen_rank;
        pt.collective_welfare = r.collective->social_welfare;
        pt.rho = r.collective->rho;
      }
    }
    rep.points.push_back(pt);
  }
  std::sort(rep.points.begin(), rep.points.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.alpha < b.alpha; });
  return rep;
}

}  // namespace colrec
