#include "colrec/report.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace colrec {

namespace {

using nlohmann::json;

void emit(std::ostream& out, const json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, child] : v.items()) {  // std::map keeps keys sorted
        if (!first) out << ",\n";
        first = false;
        out << pad << json(key).dump() << ": ";
        emit(out, child, depth + 1);
      }
      out << '\n' << close << '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out << ",\n";
        out << pad;
        emit(out, v[k], depth + 1);
      }
      out << '\n' << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out << (std::isfinite(d) ? format_real(d) : "null");
      return;
    }
    default:
      out << v.dump();
  }
}

std::string dump(const json& v) {
  std::ostringstream out;
  emit(out, v, 0);
  out << '\n';
  return out.str();
}

json interval(const std::optional<Interval>& i) {
  if (!i) return nullptr;
  return {{"lo", i->lo}, {"hi", i->hi}};
}

json item_list(const IndexList& items, const std::vector<std::string>& ids) {
  json out = json::array();
  for (Index i : items) out.push_back(ids.at(i));
  return out;
}

std::string joined(const IndexList& items, const std::vector<std::string>& ids) {
  std::string s;
  for (Index i : items) {
    if (!s.empty()) s += ';';
    s += ids.at(i);
  }
  return s;
}

json finder_json(const FinderInputs& z) {
  return {{"sigma_kmaj", z.sigma_kmaj}, {"alpha", z.alpha},           {"n_bar", z.n_bar},
          {"picky_col_sq", z.picky_col_sq}, {"av", z.av},             {"kappa", z.kappa},
          {"coll_size", z.coll_size}};
}

json general_json(const GeneralSufficiencyReport& g) {
  json j;
  j["preconditions"] = {{"in_class", g.in_class},
                        {"groups_assumption", g.groups_assumption},
                        {"item_liked", g.item_liked},
                        {"alpha_in_gap", g.alpha_in_gap},
                        {"strategy_feasible", g.strategy_feasible},
                        {"failure", g.precondition_failure},
                        {"hold", g.preconditions()}};
  j["sigma_hat"] = g.sigma_hat ? json(*g.sigma_hat) : json(nullptr);
  j["collective_gap"] = g.collective_gap ? json(*g.collective_gap) : json(nullptr);
  j["kappa_next"] = g.kappa_next;
  j["switch_users"] = g.switch_users;
  j["conditions"] = {{"alpha_below_sigma_hat", g.alpha_below_sigma_hat},
                     {"collective_below_top", g.collective_below_top},
                     {"majority_stay", g.majority_stay},
                     {"switch_join", g.switch_join},
                     {"others_stay", g.others_stay}};
  j["margins"] = {{"alpha", g.margin_alpha},
                  {"collective", g.margin_collective},
                  {"majority", g.margin_majority},
                  {"switch", g.margin_switch},
                  {"others", g.margin_others}};
  j["derived_alpha_bound"] = g.derived_alpha_bound;
  j["verdict"] = g.verdict();
  return j;
}

json collective_json(const CollectiveSection& c, const std::vector<std::string>& ids) {
  json j;
  j["kind"] = c.kind;
  j["target_item"] = ids.at(c.target_item);
  j["collective_size"] = c.collective_size;
  j["eta"] = c.eta;
  j["eta_from_finder"] = c.eta_from_finder;
  j["simulated"] = c.simulated;
  if (c.inputs) j["inputs"] = finder_json(*c.inputs);
  if (c.conditions) {
    j["sigma1_min"] = c.sigma1_min;
    j["sufficient_gap"] = interval(c.sufficient_gap);
    j["conditions"] = {{"eta_in_range", c.conditions->eta_in_range},
                       {"alpha_below_upper", c.conditions->alpha_below_upper},
                       {"alpha_above_minority", c.conditions->alpha_above_minority},
                       {"slack", c.conditions->slack},
                       {"verdict", c.conditions->verdict()}};
  }
  if (c.general) j["general"] = general_json(*c.general);
  if (c.simulated) {
    j["spectrum"] = c.spectrum;
    j["chosen_rank"] = c.chosen_rank;
    j["social_welfare"] = c.social_welfare;
    j["u_ben"] = c.u_ben;
    j["u_en"] = c.u_en;
    j["rho"] = c.rho;
    j["sw_delta"] = c.sw_delta;
    j["u_en_delta"] = c.u_en_delta;
  }
  if (c.robustness_margin) {
    j["robustness_margin"] = {{"value", *c.robustness_margin}, {"heuristic", c.margin_heuristic}};
  }
  return j;
}

json run_json(const RunReport& r) {
  json j;
  j["name"] = r.name;
  j["seed"] = r.seed;
  j["family"] = r.family;
  j["shape"] = {{"users", r.users}, {"items", r.items}};
  j["top_k"] = r.top_k;
  j["alpha"] = r.alpha;
  if (r.m_bar || r.n_bar) {
    json p;
    if (r.m_bar) p["m_bar"] = *r.m_bar;
    if (r.n_bar) p["n_bar"] = *r.n_bar;
    j["partition"] = p;
  }
  if (r.m_bar) j["singular_value_gap"] = interval(r.singular_value_gap);
  if (r.family == "popgap") j["popularity_gap_interval"] = interval(r.popularity_gap_interval);
  j["truthful"] = {{"spectrum", r.spectrum},
                   {"chosen_rank", r.chosen_rank},
                   {"social_welfare", r.social_welfare},
                   {"u_ben", r.u_ben},
                   {"u_en", r.u_en}};
  if (r.collective) j["collective"] = collective_json(*r.collective, r.item_ids);
  json users = json::array();
  for (const UserRow& row : r.rows) {
    json u = {{"user", row.id},
              {"class", row.user_class},
              {"in_collective", row.in_collective},
              {"truthful_items", item_list(row.truthful_items, r.item_ids)},
              {"truthful_welfare", row.truthful_welfare}};
    if (row.collective_items) u["collective_items"] = item_list(*row.collective_items, r.item_ids);
    if (row.collective_welfare) u["collective_welfare"] = *row.collective_welfare;
    users.push_back(std::move(u));
  }
  j["users"] = std::move(users);
  return j;
}

void flatten(const json& v, const std::string& prefix, std::ostream& out) {
  if (v.is_object()) {
    for (const auto& [key, child] : v.items()) flatten(child, prefix.empty() ? key : prefix + "." + key, out);
  } else if (v.is_array()) {
    for (std::size_t k = 0; k < v.size(); ++k) flatten(v[k], prefix + "." + std::to_string(k), out);
  } else {
    out << prefix << ',';
    if (v.is_string()) out << v.get<std::string>();
    else if (v.is_number_float()) out << (std::isfinite(v.get<double>()) ? format_real(v.get<double>()) : "");
    else if (!v.is_null()) out << v.dump();
    out << '\n';
  }
}

}  // namespace

std::string format_real(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json or csv)");
}

std::string to_json(const RunReport& report) { return dump(run_json(report)); }

std::string to_json(const SweepReport& report) {
  json j;
  j["name"] = report.name;
  j["seed"] = report.seed;
  j["family"] = report.family;
  json pts = json::array();
  for (const SweepPoint& p : report.points) {
    json pt = {{"alpha", p.alpha}, {"truthful_rank", p.truthful_rank}, {"truthful_welfare", p.truthful_welfare}};
    if (p.eta) pt["eta"] = *p.eta;
    if (p.collective_rank) pt["collective_rank"] = *p.collective_rank;
    if (p.collective_welfare) pt["collective_welfare"] = *p.collective_welfare;
    if (p.rho) pt["rho"] = *p.rho;
    pts.push_back(std::move(pt));
  }
  j["points"] = std::move(pts);
  return dump(j);
}

std::string to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "user,class,truthful_item,truthful_welfare,collective_item,collective_welfare\n";
  for (const UserRow& row : report.rows) {
    out << row.id << ',' << row.user_class << ',' << joined(row.truthful_items, report.item_ids) << ','
        << format_real(row.truthful_welfare) << ',';
    if (row.collective_items) out << joined(*row.collective_items, report.item_ids);
    out << ',';
    if (row.collective_welfare) out << format_real(*row.collective_welfare);
    out << '\n';
  }
  return out.str();
}

std::string to_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "alpha,truthful_rank,truthful_welfare,eta,collective_rank,collective_welfare,rho\n";
  for (const SweepPoint& p : report.points) {
    out << format_real(p.alpha) << ',' << p.truthful_rank << ',' << format_real(p.truthful_welfare) << ',';
    if (p.eta) out << format_real(*p.eta);
    out << ',';
    if (p.collective_rank) out << *p.collective_rank;
    out << ',';
    if (p.collective_welfare) out << format_real(*p.collective_welfare);
    out << ',';
    if (p.rho) out << format_real(*p.rho);
    out << '\n';
  }
  return out.str();
}

std::string canonical_json(const std::string& json_text) {
  try {
    return dump(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("not valid JSON: ") + e.what());
  }
}

std::string flat_csv(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("not valid JSON: ") + e.what());
  }
  std::ostringstream out;
  out << "key,value\n";
  flatten(doc, "", out);
  return out.str();
}

}  // namespace colrec
