#include "uq/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "uq/uqv_io.hpp"

namespace uq {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::vector<std::string>> parse_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split(line, ','));
    }
    return rows;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw Error(Errc::ConfigInvalid, "cannot parse " + what + " value '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& what) {
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw Error(Errc::ConfigInvalid, "cannot parse " + what + " value '" + s + "'");
    return v;
}

std::string read_existing(const std::filesystem::path& path, Errc missing) {
    if (!std::filesystem::exists(path)) throw Error(missing, "no file at " + path.string());
    return read_text_file(path);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error(Errc::IoFailure, "cannot format number");
    return std::string(buf, ptr);
}

std::string scores_to_csv(const OrganSet& organs, std::span<const ScoreVector> rows) {
    std::string out = "case_id";
    for (const auto& n : organs.names) out += "," + n;
    out += "\n";
    for (const auto& r : rows) {
        if (r.size() != organs.size())
            throw Error(Errc::DimensionMismatch, "score row " + r.case_id + " has wrong length");
        out += r.case_id;
        for (Index m = 0; m < r.size(); ++m) out += "," + format_double(r.organ_scores(m));
        out += "\n";
    }
    return out;
}

void write_scores_csv(const std::filesystem::path& path, const OrganSet& organs,
                      std::span<const ScoreVector> rows) {
    write_text_file(path, scores_to_csv(organs, rows));
}

ScoreTable parse_scores_csv(const std::string& text) {
    const auto rows = parse_rows(text);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "case_id")
        throw Error(Errc::ConfigInvalid, "scores CSV must start with a case_id header");
    ScoreTable table{OrganSet(std::vector<std::string>(rows.front().begin() + 1, rows.front().end())), {}};
    const auto m = table.organs.size();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (static_cast<Index>(r.size()) != m + 1)
            throw Error(Errc::DimensionMismatch, "scores CSV row " + std::to_string(i) + " has " +
                                                     std::to_string(r.size()) + " fields");
        ScoreVector sv{r[0], Eigen::VectorXd(m)};
        for (Index k = 0; k < m; ++k) sv.organ_scores(k) = parse_double(r[static_cast<std::size_t>(k + 1)], "score");
        table.rows.push_back(std::move(sv));
    }
    return table;
}

ScoreTable read_scores_csv(const std::filesystem::path& path) {
    return parse_scores_csv(read_existing(path, Errc::IoFailure));
}

std::string verdicts_to_csv(std::span<const OodVerdict> verdicts) {
    std::string out = "case_id,d_squared,threshold,is_ood\n";
    for (const auto& v : verdicts)
        out += v.case_id + "," + format_double(v.d_squared) + "," + format_double(v.threshold) + "," +
               (v.is_ood ? "1" : "0") + "\n";
    return out;
}

void write_verdicts_csv(const std::filesystem::path& path, std::span<const OodVerdict> verdicts) {
    write_text_file(path, verdicts_to_csv(verdicts));
}

std::vector<OodVerdict> parse_verdicts_csv(const std::string& text) {
    const auto rows = parse_rows(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"case_id", "d_squared", "threshold", "is_ood"})
        throw Error(Errc::ConfigInvalid, "verdict CSV header must be case_id,d_squared,threshold,is_ood");
    std::vector<OodVerdict> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw Error(Errc::ConfigInvalid, "verdict row " + std::to_string(i) + " malformed");
        OodVerdict v;
        v.case_id = r[0];
        v.d_squared = parse_double(r[1], "d_squared");
        v.threshold = parse_double(r[2], "threshold");
        v.is_ood = parse_int(r[3], "is_ood") != 0;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<OodVerdict> read_verdicts_csv(const std::filesystem::path& path) {
    return parse_verdicts_csv(read_existing(path, Errc::IoFailure));
}

std::string labels_to_csv(std::span<const CaseLabel> labels) {
    std::string out = "case_id,label\n";
    for (const auto& l : labels) out += l.case_id + "," + std::to_string(l.label) + "\n";
    return out;
}

std::vector<CaseLabel> parse_labels_csv(const std::string& text) {
    const auto rows = parse_rows(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"case_id", "label"})
        throw Error(Errc::ConfigInvalid, "labels CSV header must be case_id,label");
    std::vector<CaseLabel> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw Error(Errc::ConfigInvalid, "labels row " + std::to_string(i) + " malformed");
        const int label = parse_int(rows[i][1], "label");
        if (label != 0 && label != 1) throw Error(Errc::ConfigInvalid, "label must be 0 or 1");
        out.push_back({rows[i][0], label});
    }
    return out;
}

std::vector<CaseLabel> read_labels_csv(const std::filesystem::path& path) {
    return parse_labels_csv(read_existing(path, Errc::IoFailure));
}

std::string roc_to_csv(std::span<const RocPoint> curve) {
    std::string out = "fpr,tpr,threshold\n";
    for (const auto& p : curve)
        out += format_double(p.fpr) + "," + format_double(p.tpr) + "," +
               (std::isinf(p.threshold) ? (p.threshold > 0 ? "inf" : "-inf") : format_double(p.threshold)) + "\n";
    return out;
}

std::vector<LabeledScore> join_labels(std::span<const OodVerdict> verdicts, std::span<const CaseLabel> labels) {
    std::map<std::string, int> by_id;
    for (const auto& l : labels) by_id[l.case_id] = l.label;
    std::vector<LabeledScore> out;
    for (const auto& v : verdicts) {
        auto it = by_id.find(v.case_id);
        if (it != by_id.end()) out.push_back({v.case_id, v.d_squared, it->second});
    }
    return out;
}

std::vector<PredictionEntry> CaseManifest::for_learners(std::span<const std::size_t> learners) const {
    std::vector<PredictionEntry> out;
    for (const auto& e : predictions) {
        if (!e.learner)
            throw Error(Errc::MissingHoldoutPredictions,
                        "case " + case_id + ": prediction " + e.path.string() + " has no learner tag");
        if (std::find(learners.begin(), learners.end(), *e.learner) != learners.end()) out.push_back(e);
    }
    return out;
}

std::string case_manifest_to_json(const CaseManifest& manifest) {
    nlohmann::ordered_json j;
    j["case_id"] = manifest.case_id;
    auto preds = nlohmann::ordered_json::array();
    for (const auto& e : manifest.predictions) {
        nlohmann::ordered_json p;
        p["path"] = e.path.generic_string();
        if (e.learner) p["learner"] = *e.learner;
        if (e.pass) p["pass"] = *e.pass;
        preds.push_back(std::move(p));
    }
    j["predictions"] = std::move(preds);
    return j.dump(1) + "\n";
}

CaseManifest load_case_manifest(const std::filesystem::path& path) {
    const auto text = read_existing(path, Errc::MissingManifest);
    try {
        const auto j = nlohmann::json::parse(text);
        CaseManifest m;
        m.case_id = j.at("case_id").get<std::string>();
        const auto base = path.parent_path();
        for (const auto& p : j.at("predictions")) {
            PredictionEntry e;
            std::filesystem::path rel = p.at("path").get<std::string>();
            e.path = rel.is_absolute() ? rel : base / rel;
            if (p.contains("learner")) e.learner = p.at("learner").get<std::size_t>();
            if (p.contains("pass")) e.pass = p.at("pass").get<std::size_t>();
            m.predictions.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigInvalid, "malformed case manifest " + path.string() + ": " + e.what());
    }
}

void save_case_manifest(const std::filesystem::path& path, const CaseManifest& manifest) {
    const auto base = std::filesystem::absolute(path).parent_path();
    CaseManifest stored = manifest;
    for (auto& e : stored.predictions) {
        if (!e.path.is_absolute()) continue;
        auto rel = e.path.lexically_normal().lexically_relative(base);
        if (!rel.empty()) e.path = std::move(rel);
    }
    write_text_file(path, case_manifest_to_json(stored));
}

std::string organs_to_json(const OrganSet& organs) {
    nlohmann::ordered_json j;
    j["organs"] = organs.names;
    return j.dump(1) + "\n";
}

OrganSet load_organs(const std::filesystem::path& path) {
    const auto text = read_existing(path, Errc::IoFailure);
    try {
        const auto j = nlohmann::json::parse(text);
        return OrganSet(j.at("organs").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigInvalid, "malformed organs file " + path.string() + ": " + e.what());
    }
}

}  // namespace uq
