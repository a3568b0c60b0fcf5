#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "rarelab/errors.hpp"
#include "rarelab/experiments.hpp"

#ifndef RARELAB_COMMIT
#define RARELAB_COMMIT "unknown"
#endif

namespace rarelab {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : (c == '\n' ? std::string(" ") : std::string(1, c));
    return out + "\"";
}

}  // namespace

std::string build_commit() { return RARELAB_COMMIT; }

void StudyReport::add_row(std::vector<double> row, double wall_s, std::string st) {
    if (row.size() != columns.size()) throw DomainError("report: row width does not match the columns");
    rows.push_back(std::move(row));
    wall.push_back(wall_s);
    status.push_back(std::move(st));
}

void StudyReport::add_meta(const std::string& k, double v) { meta.emplace_back(k, num(v)); }
void StudyReport::add_meta(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }

bool StudyReport::all_pass() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

double StudyReport::column(std::size_t row, const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return rows.at(row).at(c);
    throw DomainError("report: no column '" + name + "'");
}

std::string report_csv(const StudyReport& r) {
    std::string out = "# schema=1\n";
    out += "# kind=" + r.kind + "\n";
    out += "# config_hash=" + r.config_hash + "\n";
    out += "# commit=" + r.commit + "\n";
    out += "# seed=" + std::to_string(r.seed) + "\n";
    for (const auto& [k, v] : r.meta) out += "# meta " + k + "=" + v + "\n";
    out += "config_hash";
    for (const auto& c : r.columns) out += "," + c;
    out += ",status,wall_s\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        out += r.config_hash;
        for (double v : r.rows[i]) out += "," + num(v);
        char w[32];
        std::snprintf(w, sizeof w, "%.3f", r.wall[i]);
        out += "," + csv_field(r.status[i]) + "," + w + "\n";
    }
    for (const auto& v : r.verdicts)
        out += "# verdict " + v.name + " " + (v.pass ? "PASS" : "FAIL") + " value=" + num(v.value) +
               " threshold=" + num(v.threshold) + (v.detail.empty() ? "" : " " + v.detail) + "\n";
    return out;
}

void emit_report(const StudyReport& r, const std::string& path) {
    {
        std::ofstream out(path);
        if (!out) throw ConfigError("output: cannot write '" + path + "'");
        out << report_csv(r);
    }
    nlohmann::json j;
    j["schema"] = 1;
    j["kind"] = r.kind;
    j["config_hash"] = r.config_hash;
    j["commit"] = r.commit;
    j["seed"] = r.seed;
    j["config"] = r.config;
    j["columns"] = r.columns;
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [k, v] : r.meta) meta[k] = v;
    j["meta"] = meta;
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : r.verdicts)
        j["verdicts"].push_back({{"name", v.name},
                                 {"pass", v.pass},
                                 {"value", num(v.value)},
                                 {"threshold", num(v.threshold)},
                                 {"detail", v.detail}});
    j["all_pass"] = r.all_pass();
    std::ofstream out(path + ".json");
    if (!out) throw ConfigError("output: cannot write '" + path + ".json'");
    out << j.dump(2) << "\n";
}

void run_pool(int jobs, std::size_t count, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(guard);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace rarelab
