#include "sonimon/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sonimon {

namespace {

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::string fmt(double v, int digits = 6) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt(std::optional<double> v, int digits = 6) { return fmt(v.value_or(NAN), digits); }

std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Participant {
  const SessionLog* log;
  std::map<Stimulus, Rates> rates;
  std::map<Stimulus, double> d_prime;
  std::optional<double> overall;  // mean over stimuli with a d'
  std::optional<double> copy_ms;
};

struct EcologySummary {
  EcologyId id;
  std::vector<Participant> participants;
  std::vector<StimulusTrialOutcome> outcomes;
  std::vector<SurveyResponse> surveys;
};

Json anova_entry(std::string_view measure, EcologyId a, EcologyId b, const std::vector<double>& ga,
                 const std::vector<double>& gb, std::ostringstream& csv) {
  Json j{{"measure", measure},
         {"ecology_a", std::string(ecology_name(a))},
         {"ecology_b", std::string(ecology_name(b))},
         {"n_a", ga.size()},
         {"n_b", gb.size()}};
  csv << measure << ',' << ecology_name(a) << ',' << ecology_name(b) << ',' << ga.size() << ','
      << gb.size() << ',';
  try {
    const auto r = anova_oneway({ga, gb});
    j["F"] = std::isnan(r.F) ? Json(nullptr) : (std::isinf(r.F) ? Json("inf") : Json(r.F));
    j["p"] = r.p;
    j["df_between"] = r.df_between;
    j["df_within"] = r.df_within;
    j["zero_within_variance"] = r.zero_within_variance;
    csv << fmt(r.F) << ',' << fmt(r.p) << ',' << r.df_between << ',' << r.df_within << ','
        << (r.zero_within_variance ? "true" : "false") << ",\n";
  } catch (const std::invalid_argument& e) {
    j["error"] = e.what();
    csv << ",,,,," << csv_quote(e.what()) << '\n';
  }
  return j;
}

}  // namespace

Report build_report(const std::vector<SessionLog>& sessions) {
  std::vector<const SessionLog*> ordered;
  for (const auto& s : sessions) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SessionLog* a, const SessionLog* b) { return a->session_id < b->session_id; });

  std::map<EcologyId, EcologySummary> by_eco;
  for (const auto* log : ordered) {
    auto& eco = by_eco.try_emplace(log->ecology, EcologySummary{log->ecology, {}, {}, {}}).first->second;
    Participant p{log, {}, {}, std::nullopt, mean_copy_ms(*log)};
    const auto outcomes = classify_session(*log);
    std::vector<double> ds;
    for (Stimulus s : ecology(log->ecology).stimuli) {
      std::vector<StimulusTrialOutcome> mine;
      for (const auto& o : outcomes) {
        if (o.stimulus == s) mine.push_back(o);
      }
      if (const auto r = rates(mine)) {
        p.rates[s] = *r;
        p.d_prime[s] = d_prime(r->H, r->FA);
        ds.push_back(p.d_prime[s]);
      }
    }
    if (!ds.empty()) p.overall = mean(ds);
    eco.outcomes.insert(eco.outcomes.end(), outcomes.begin(), outcomes.end());
    if (log->survey) eco.surveys.push_back(*log->survey);
    eco.participants.push_back(std::move(p));
  }

  Report report;
  Json& doc = report.document;
  doc["schema"] = std::string(kReportSchema);
  doc["session_count"] = ordered.size();
  doc["no_sessions"] = ordered.empty();

  std::ostringstream sens, times, primary, survey, anova;
  sens << "ecology,stimulus,participants,H,FA,d_prime\n";
  times << "ecology,stimulus,hits,mean_ms\n";
  primary << "ecology,participants,min_ms,q1_ms,median_ms,q3_ms,max_ms,mean_ms\n";
  anova << "measure,ecology_a,ecology_b,n_a,n_b,F,p,df_between,df_within,zero_within_variance,error\n";

  Json participants = Json::array();
  Json ecologies = Json::array();
  std::map<EcologyId, std::array<double, kSurveyStatementCount>> survey_cols;
  for (auto& [id, eco] : by_eco) {
    const auto eco_name = std::string(ecology_name(id));
    Json e{{"ecology", eco_name}, {"participants", eco.participants.size()}};

    Json sensitivity = Json::array();
    std::vector<double> stimulus_means;
    Json annotation = Json::array();
    for (Stimulus s : ecology(id).stimuli) {
      std::vector<double> ds, hs, fas;
      for (const auto& p : eco.participants) {
        if (const auto it = p.d_prime.find(s); it != p.d_prime.end()) {
          ds.push_back(it->second);
          hs.push_back(p.rates.at(s).H);
          fas.push_back(p.rates.at(s).FA);
        }
      }
      Json row{{"stimulus", std::string(stimulus_name(s))}, {"participants", ds.size()}};
      if (ds.empty()) {
        row["H"] = row["FA"] = row["d_prime"] = nullptr;
        sens << eco_name << ',' << stimulus_name(s) << ",0,,,\n";
      } else {
        const double d = mean_sensitivity(ds);
        stimulus_means.push_back(d);
        row["H"] = mean(hs);
        row["FA"] = mean(fas);
        row["d_prime"] = d;
        sens << eco_name << ',' << stimulus_name(s) << ',' << ds.size() << ',' << fmt(mean(hs)) << ','
             << fmt(mean(fas)) << ',' << fmt(d) << '\n';
      }
      sensitivity.push_back(std::move(row));

      std::vector<StimulusTrialOutcome> mine;
      int hits = 0;
      for (const auto& o : eco.outcomes) {
        if (o.stimulus != s) continue;
        mine.push_back(o);
        if (o.outcome == Outcome::Hit) ++hits;
      }
      const auto ms = mean_annotation_ms(mine);
      annotation.push_back({{"stimulus", std::string(stimulus_name(s))}, {"hits", hits}, {"mean_ms", number_or_null(ms)}});
      times << eco_name << ',' << stimulus_name(s) << ',' << hits << ',' << fmt(ms, 3) << '\n';
    }
    // "Overall" is the mean of the per-stimulus means.
    const std::optional<double> overall =
        stimulus_means.empty() ? std::nullopt : std::optional<double>(mean(stimulus_means));
    e["sensitivity"] = std::move(sensitivity);
    e["overall_d_prime"] = number_or_null(overall);
    sens << eco_name << ",OVERALL," << eco.participants.size() << ",,," << fmt(overall) << '\n';
    e["annotation_time_ms"] = std::move(annotation);

    std::vector<double> copy;
    for (const auto& p : eco.participants) {
      if (p.copy_ms) copy.push_back(*p.copy_ms);
    }
    if (copy.empty()) {
      e["primary_task"] = {{"participants", 0}, {"summary", nullptr}, {"mean_ms", nullptr}};
      primary << eco_name << ",0,,,,,,\n";
    } else {
      const auto f = five_number(copy);
      e["primary_task"] = {{"participants", copy.size()},
                           {"mean_ms", mean(copy)},
                           {"summary",
                            {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}}}};
      primary << eco_name << ',' << copy.size() << ',' << fmt(f.min, 3) << ',' << fmt(f.q1, 3) << ','
              << fmt(f.median, 3) << ',' << fmt(f.q3, 3) << ',' << fmt(f.max, 3) << ',' << fmt(mean(copy), 3)
              << '\n';
    }

    const auto agg = survey_aggregate(eco.surveys);
    survey_cols[id] = agg;
    Json srows = Json::array();
    for (std::size_t i = 0; i < kSurveyStatementCount; ++i) {
      srows.push_back({{"statement", std::string(kSurveyStatements[i])},
                       {"score", number_or_null(std::optional<double>(agg[i]))}});
    }
    e["survey"] = {{"responses", eco.surveys.size()}, {"statements", std::move(srows)}};
    ecologies.push_back(std::move(e));

    for (const auto& p : eco.participants) {
      Json stim = Json::array();
      for (const auto& [s, r] : p.rates) {
        stim.push_back({{"stimulus", std::string(stimulus_name(s))},
                        {"H", r.H},
                        {"FA", r.FA},
                        {"d_prime", p.d_prime.at(s)},
                        {"hits", r.hits},
                        {"present", r.present},
                        {"false_alarms", r.false_alarms},
                        {"fa_opportunities", r.fa_opportunities}});
      }
      participants.push_back({{"session_id", p.log->session_id},
                              {"ecology", eco_name},
                              {"levels", p.log->levels.size()},
                              {"stimuli", std::move(stim)},
                              {"overall_d_prime", number_or_null(p.overall)},
                              {"mean_copy_ms", number_or_null(p.copy_ms)}});
    }
  }
  doc["ecologies"] = std::move(ecologies);
  doc["participants"] = std::move(participants);

  survey << "statement";
  for (const auto& [id, _] : survey_cols) survey << ',' << ecology_name(id);
  survey << '\n';
  for (std::size_t i = 0; i < kSurveyStatementCount; ++i) {
    survey << csv_quote(kSurveyStatements[i]);
    for (const auto& [id, col] : survey_cols) survey << ',' << fmt(col[i], 2);
    survey << '\n';
  }

  Json tests = Json::array();
  for (auto a = by_eco.begin(); a != by_eco.end(); ++a) {
    for (auto b = std::next(a); b != by_eco.end(); ++b) {
      std::vector<double> da, db, ca, cb;
      for (const auto& p : a->second.participants) {
        if (p.overall) da.push_back(*p.overall);
        if (p.copy_ms) ca.push_back(*p.copy_ms);
      }
      for (const auto& p : b->second.participants) {
        if (p.overall) db.push_back(*p.overall);
        if (p.copy_ms) cb.push_back(*p.copy_ms);
      }
      tests.push_back(anova_entry("overall_d_prime", a->first, b->first, da, db, anova));
      tests.push_back(anova_entry("copy_time_ms", a->first, b->first, ca, cb, anova));
    }
  }
  doc["anova"] = std::move(tests);

  report.tables["sensitivity.csv"] = sens.str();
  report.tables["times.csv"] = times.str();
  report.tables["primary.csv"] = primary.str();
  report.tables["survey.csv"] = survey.str();
  report.tables["anova.csv"] = anova.str();
  return report;
}

void write_report(const std::filesystem::path& dir, const Report& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  write("report.json", report.document.dump(2) + "\n");
  for (const auto& [name, text] : report.tables) write(name, text);
}

}  // namespace sonimon
