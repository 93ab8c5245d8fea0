#include "sir/analytics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sir/error.hpp"

namespace sir::analytics {

std::string_view condition_label(Condition c) {
  switch (c) {
    case Condition::HumanText: return "Human Feedback";
    case Condition::SlideOnly: return "Relevant Slide Page";
    case Condition::AiText: return "AI Feedback";
    case Condition::Combined: return "Combined (Slide + AI Feedback)";
  }
  return "?";
}

std::string_view condition_column(Condition c) {
  switch (c) {
    case Condition::HumanText: return "Human Feedback";
    case Condition::SlideOnly: return "Slide";
    case Condition::AiText: return "AI Feedback";
    case Condition::Combined: return "Combined";
  }
  return "?";
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || (s.starts_with("-0.") && s.find_first_not_of("-0.") == std::string::npos)) {
    s.erase(0, 1);
  }
  return s;
}

// Three significant digits in fixed notation, trailing zeros dropped.
std::string sig3(double v) {
  if (v == 0 || !std::isfinite(v)) return v == 0 ? "0" : fixed(v, 3);
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
  std::string s = fixed(v, std::max(0, 2 - magnitude));
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::string pct_sig3(double fraction) { return sig3(fraction * 100.0); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// "Q2" < "Q10"; otherwise lexicographic.
bool natural_less(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    auto pos = s.find_first_of("0123456789");
    if (pos == std::string::npos) return std::pair<std::string, long>{s, -1};
    auto end = s.find_first_not_of("0123456789", pos);
    if (end != std::string::npos) return std::pair<std::string, long>{s, -1};
    return std::pair<std::string, long>{s.substr(0, pos), std::stol(s.substr(pos))};
  };
  auto [pa, na] = split(a);
  auto [pb, nb] = split(b);
  if (na >= 0 && nb >= 0 && pa == pb) return na < nb;
  return a < b;
}

}  // namespace

std::vector<GainRecord> gain_records(std::span<const Session> sessions) {
  std::vector<GainRecord> out;
  for (const auto& s : filter_sessions(sessions)) {
    if (!s.pre_score || !s.post_score) continue;
    out.push_back({s.session_id, s.condition, *s.pre_score, *s.post_score, s.max_score,
                   stats::learning_gain(*s.pre_score, *s.post_score, s.max_score)});
  }
  return out;
}

void sort_fig3a(std::vector<GainRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const GainRow& a, const GainRow& b) { return a.mean > b.mean; });
}

StudyReport analyze(std::span<const Session> input, std::span<const SurveyItem> survey) {
  // Fixed order so sums, and therefore the rendered digits, do not depend on input order.
  std::vector<Session> sessions(input.begin(), input.end());
  std::sort(sessions.begin(), sessions.end(),
            [](const Session& a, const Session& b) { return a.session_id < b.session_id; });
  StudyReport rep;
  rep.sessions_total = sessions.size();
  const auto retained = filter_sessions(sessions);
  rep.sessions_retained = retained.size();
  const auto gains = gain_records(sessions);

  std::map<Condition, std::vector<const GainRecord*>> by_cond;
  for (const auto& g : gains) by_cond[g.condition].push_back(&g);
  for (auto c : kAllConditions) rep.group_sizes[c] = static_cast<int>(by_cond[c].size());

  // Paired t-tests.
  for (auto c : kAllConditions) {
    TTestRow row{std::string(condition_label(c)), std::nullopt};
    std::vector<double> pre, post;
    for (const auto* g : by_cond[c]) {
      pre.push_back(g->pre);
      post.push_back(g->post);
    }
    try {
      row.result = stats::paired_ttest(pre, post);
    } catch (const Error& e) {
      rep.notes.push_back("t-test for " + row.label + " undefined: " + e.what());
    }
    rep.table1.push_back(std::move(row));
  }

  // Two-way ANOVA on gains.
  std::vector<stats::FactorialObservation> obs;
  for (const auto& g : gains) obs.push_back({g.gain, has_ai_text(g.condition), has_slide(g.condition)});
  try {
    rep.table2 = stats::two_way_anova(obs);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("two-way ANOVA undefined: ") + e.what());
  }

  // Pre-test equivalence across conditions.
  std::vector<std::vector<double>> pre_groups;
  for (auto c : kAllConditions) {
    std::vector<double> g;
    for (const auto* r : by_cond[c]) g.push_back(r->pre);
    if (!g.empty()) pre_groups.push_back(std::move(g));
  }
  try {
    rep.pretest_anova = stats::one_way_anova(pre_groups);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("pre-test ANOVA undefined: ") + e.what());
  }

  // Mean gains with 95% CIs.
  for (auto c : kAllConditions) {
    std::vector<double> v;
    for (const auto* g : by_cond[c]) v.push_back(g->gain);
    if (v.empty()) continue;
    GainRow row{std::string(condition_label(c)), stats::mean(v), std::nullopt, std::nullopt,
                static_cast<int>(v.size())};
    if (v.size() >= 2) {
      auto ci = stats::mean_ci(v);
      row.lower = ci.lower();
      row.upper = ci.upper();
    }
    rep.fig3a.push_back(std::move(row));
  }
  sort_fig3a(rep.fig3a);

  // Likert items.
  std::map<std::string, std::string> texts;
  std::set<std::string> attention_items;
  std::vector<std::string> item_ids;
  for (const auto& item : survey) {
    if (item.attention_expected) {
      attention_items.insert(item.item_id);
      continue;
    }
    texts[item.item_id] = item.text;
    item_ids.push_back(item.item_id);
  }
  if (survey.empty()) {
    std::set<std::string> seen;
    for (const auto& s : retained) {
      for (const auto& a : s.survey) seen.insert(a.item_id);
    }
    item_ids.assign(seen.begin(), seen.end());
    std::sort(item_ids.begin(), item_ids.end(), natural_less);
  }
  for (const auto& id : item_ids) {
    LikertRow row;
    row.label = texts.count(id) && !texts[id].empty() ? id + ". " + texts[id] : id;
    for (auto c : kAllConditions) {
      std::vector<int> values;
      for (const auto& s : retained) {
        if (s.condition != c) continue;
        for (const auto& a : s.survey) {
          if (a.item_id == id) values.push_back(a.value);
        }
      }
      row.pct_agree[c] = values.empty() ? std::nullopt : std::optional(stats::likert_pct_agree(values));
    }
    rep.table3.push_back(std::move(row));
  }

  // Internal consistency per condition over participants who answered every item.
  for (auto c : kAllConditions) {
    AlphaRow row{std::string(condition_label(c)), std::nullopt};
    std::vector<std::vector<double>> matrix;
    for (const auto& s : retained) {
      if (s.condition != c) continue;
      std::vector<double> r;
      for (const auto& id : item_ids) {
        auto it = std::find_if(s.survey.begin(), s.survey.end(), [&](const auto& a) { return a.item_id == id; });
        if (it == s.survey.end()) break;
        r.push_back(it->value);
      }
      if (r.size() == item_ids.size()) matrix.push_back(std::move(r));
    }
    try {
      row.alpha = stats::cronbach_alpha(matrix);
    } catch (const Error& e) {
      rep.notes.push_back("alpha for " + row.label + " undefined: " + e.what());
    }
    rep.alphas.push_back(std::move(row));
  }
  return rep;
}

std::string render_table1_tex(std::span<const TTestRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.label + " & ";
    out += r.result ? fixed(r.result->t_stat, 2) + " & " + fixed(r.result->p_value, 5) : "- & -";
    out += " \\\\\n";
  }
  return out;
}

std::string render_table2_tex(const stats::AnovaTable& table) {
  std::string out;
  for (const auto& r : table.rows) {
    out += "$" + r.source + "$ & " + sig3(r.sum_sq) + " & " + fixed(r.df, 1) + " & ";
    out += r.f ? fixed(*r.f, 4) : "-";
    out += " & ";
    out += r.p ? fixed(*r.p, 3) : "-";
    out += " \\\\\n";
  }
  return out;
}

std::string render_fig3a_tex(std::span<const GainRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.label + " & " + pct_sig3(r.mean) + "\\% & ";
    out += r.lower ? pct_sig3(*r.lower) + "\\%" : "-";
    out += " & ";
    out += r.upper ? pct_sig3(*r.upper) + "\\%" : "-";
    out += " & ";
    out += r.n ? std::to_string(*r.n) : "-";
    out += " \\\\\n";
  }
  return out;
}

std::string render_table3_tex(std::span<const LikertRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.label;
    for (auto c : kAllConditions) {
      auto it = r.pct_agree.find(c);
      out += " & ";
      out += it != r.pct_agree.end() && it->second ? fixed(*it->second, 2) : "-";
    }
    out += " \\\\\n";
  }
  return out;
}

std::string render_tex(const StudyReport& rep) {
  std::string out;
  out += "% Paired two-tailed t-tests: Feedback Type & t-stat & p-value\n";
  out += render_table1_tex(rep.table1);
  out += "% Two-way ANOVA (Type II): Source & Sum Sq & df & F & p-value\n";
  if (rep.table2) out += render_table2_tex(*rep.table2);
  out += "% Average learning gain: Condition & Mean & 95% CI lower & 95% CI upper & n\n";
  out += render_fig3a_tex(rep.fig3a);
  out += "% Proportion agree or higher: Question & Human Feedback & Slide & AI Feedback & Combined\n";
  out += render_table3_tex(rep.table3);
  return out;
}

std::string render_markdown(const StudyReport& rep) {
  std::ostringstream o;
  o << "# Study report\n\n";
  o << "Sessions: " << rep.sessions_total << " exported, " << rep.sessions_retained
    << " retained after attention-check filtering.\n\n";
  o << "| Condition | n |\n|---|---|\n";
  for (auto c : kAllConditions) {
    auto it = rep.group_sizes.find(c);
    o << "| " << condition_label(c) << " | " << (it == rep.group_sizes.end() ? 0 : it->second) << " |\n";
  }

  o << "\n## Learning gain: paired two-tailed t-tests\n\n";
  o << "| Feedback Type | t-stat | p-value | df |\n|---|---|---|---|\n";
  for (const auto& r : rep.table1) {
    if (r.result) {
      o << "| " << r.label << " | " << fixed(r.result->t_stat, 2) << " | " << fixed(r.result->p_value, 5)
        << " | " << r.result->df << " |\n";
    } else {
      o << "| " << r.label << " | - | - | - |\n";
    }
  }

  o << "\n## Two-way ANOVA on learning gain (Type II sums of squares)\n\n";
  if (rep.table2) {
    o << "| Source | Sum Sq | df | F | p-value |\n|---|---|---|---|---|\n";
    for (const auto& r : rep.table2->rows) {
      o << "| " << r.source << " | " << sig3(r.sum_sq) << " | " << fixed(r.df, 1) << " | "
        << (r.f ? fixed(*r.f, 4) : "-") << " | " << (r.p ? fixed(*r.p, 3) : "-") << " |\n";
    }
  } else {
    o << "Not available.\n";
  }

  o << "\n## Pre-test scores: one-way ANOVA across conditions\n\n";
  if (rep.pretest_anova) {
    o << "F = " << fixed(rep.pretest_anova->f, 2) << ", p = " << fixed(rep.pretest_anova->p, 3)
      << ", df = (" << rep.pretest_anova->df_between << ", " << rep.pretest_anova->df_within << ")\n";
  } else {
    o << "Not available.\n";
  }

  o << "\n## Average learning gain with 95% confidence interval\n\n";
  o << "| Condition | Mean gain | 95% CI | n |\n|---|---|---|---|\n";
  for (const auto& r : rep.fig3a) {
    o << "| " << r.label << " | " << pct_sig3(r.mean) << "% | ";
    if (r.lower && r.upper) {
      o << "[" << pct_sig3(*r.lower) << "%, " << pct_sig3(*r.upper) << "%]";
    } else {
      o << "-";
    }
    o << " | " << (r.n ? std::to_string(*r.n) : "-") << " |\n";
  }

  o << "\n## Proportion of 'Agree' or higher (Likert >= 4)\n\n";
  o << "| Question |";
  for (auto c : kAllConditions) o << " " << condition_column(c) << " (%Agree) |";
  o << "\n|---|---|---|---|---|\n";
  for (const auto& r : rep.table3) {
    o << "| " << r.label << " |";
    for (auto c : kAllConditions) {
      auto it = r.pct_agree.find(c);
      o << " " << (it != r.pct_agree.end() && it->second ? fixed(*it->second, 2) : "-") << " |";
    }
    o << "\n";
  }

  o << "\n## Internal consistency of Likert items (Cronbach's alpha)\n\n";
  o << "| Condition | alpha |\n|---|---|\n";
  for (const auto& r : rep.alphas) {
    o << "| " << r.label << " | " << (r.alpha ? fixed(*r.alpha, 3) : "-") << " |\n";
  }

  if (!rep.notes.empty()) {
    o << "\n## Notes\n\n";
    for (const auto& n : rep.notes) o << "- " << n << "\n";
  }
  return o.str();
}

std::string render_csv(const StudyReport& rep) {
  std::ostringstream o;
  o << "section,label,metric,value\n";
  auto row = [&](std::string_view section, std::string_view label, std::string_view metric,
                 const std::string& value) {
    o << section << ',' << csv_field(label) << ',' << metric << ',' << value << '\n';
  };
  row("sessions", "all", "exported", std::to_string(rep.sessions_total));
  row("sessions", "all", "retained", std::to_string(rep.sessions_retained));
  for (const auto& [c, n] : rep.group_sizes) row("sessions", condition_label(c), "n", std::to_string(n));
  for (const auto& r : rep.table1) {
    if (!r.result) continue;
    row("ttest", r.label, "t_stat", num(r.result->t_stat));
    row("ttest", r.label, "df", std::to_string(r.result->df));
    row("ttest", r.label, "p_value", num(r.result->p_value));
    row("ttest", r.label, "n", std::to_string(r.result->n));
  }
  if (rep.table2) {
    for (const auto& r : rep.table2->rows) {
      row("anova2", r.source, "sum_sq", num(r.sum_sq));
      row("anova2", r.source, "df", num(r.df));
      if (r.f) row("anova2", r.source, "F", num(*r.f));
      if (r.p) row("anova2", r.source, "p_value", num(*r.p));
    }
  }
  if (rep.pretest_anova) {
    row("pretest_anova", "conditions", "F", num(rep.pretest_anova->f));
    row("pretest_anova", "conditions", "p_value", num(rep.pretest_anova->p));
    row("pretest_anova", "conditions", "df_between", std::to_string(rep.pretest_anova->df_between));
    row("pretest_anova", "conditions", "df_within", std::to_string(rep.pretest_anova->df_within));
  }
  for (const auto& r : rep.fig3a) {
    row("gain", r.label, "mean", num(r.mean));
    if (r.lower) row("gain", r.label, "ci95_lower", num(*r.lower));
    if (r.upper) row("gain", r.label, "ci95_upper", num(*r.upper));
    if (r.n) row("gain", r.label, "n", std::to_string(*r.n));
  }
  for (const auto& r : rep.table3) {
    for (const auto& [c, pct] : r.pct_agree) {
      if (pct) row("likert", r.label, std::string("pct_agree:") + std::string(condition_name(c)), num(*pct));
    }
  }
  for (const auto& r : rep.alphas) {
    if (r.alpha) row("alpha", r.label, "cronbach_alpha", num(*r.alpha));
  }
  return o.str();
}

}  // namespace sir::analytics
