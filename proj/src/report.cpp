#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "camp/harness.hpp"

namespace camp {

namespace {

const char* const kColumns[] = {"method", "domain", "planner", "task_id", "seed", "run", "rollout", "n_train",
                                "return", "compute_seconds", "expansions", "cost_channel", "cost", "lambda",
                                "objective", "context", "flagged", "note"};

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

}  // namespace

void write_csv_header(std::ostream& out) {
    bool first = true;
    for (const char* c : kColumns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    out << '\n';
}

void write_csv_row(std::ostream& out, const ResultRow& r) {
    std::ostringstream line;
    line << std::setprecision(17);
    line << quote(r.method) << ',' << quote(r.domain) << ',' << quote(r.planner) << ',' << quote(r.task_id) << ','
         << r.seed << ',' << r.run << ',' << r.rollout << ',' << r.n_train << ',' << r.ret << ','
         << r.compute_seconds << ',' << r.expansions << ',' << quote(r.cost_channel) << ',' << r.cost << ','
         << r.lambda << ',' << r.objective << ',' << quote(r.context) << ',' << (r.flagged ? 1 : 0) << ','
         << quote(r.note) << '\n';
    out << line.str();
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    write_csv_header(out);
    for (const auto& r : rows) write_csv_row(out, r);
}

std::vector<ResultRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = split_csv_line(line);
    if (header.size() != std::size(kColumns) || header.front() != kColumns[0])
        throw std::invalid_argument("unexpected CSV header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != std::size(kColumns)) throw std::invalid_argument("malformed CSV row: " + line);
        ResultRow r;
        r.method = f[0];
        r.domain = f[1];
        r.planner = f[2];
        r.task_id = f[3];
        r.seed = std::stoull(f[4]);
        r.run = std::stoi(f[5]);
        r.rollout = std::stoi(f[6]);
        r.n_train = std::stoi(f[7]);
        r.ret = std::stod(f[8]);
        r.compute_seconds = std::stod(f[9]);
        r.expansions = std::stoll(f[10]);
        r.cost_channel = f[11];
        r.cost = std::stod(f[12]);
        r.lambda = std::stod(f[13]);
        r.objective = std::stod(f[14]);
        r.context = f[15];
        r.flagged = f[16] == "1";
        r.note = f[17];
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct Moments {
    int n = 0;
    double sum = 0.0, sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double sd() const {
        if (n < 2) return 0.0;
        const double var = (sum_sq - sum * sum / n) / (n - 1);
        return var > 0.0 ? std::sqrt(var) : 0.0;
    }
};

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, double, int>;
    std::map<Key, std::array<Moments, 4>> groups;
    std::vector<Key> order;
    for (const auto& r : rows) {
        if (r.note.rfind("error:", 0) == 0) continue;
        Key key{r.method, r.domain, r.planner, r.lambda, r.n_train};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second[0].add(r.objective);
        it->second[1].add(r.ret);
        it->second[2].add(static_cast<double>(r.expansions));
        it->second[3].add(r.compute_seconds);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& m = groups.at(key);
        SummaryRow s;
        std::tie(s.method, s.domain, s.planner, s.lambda, s.n_train) = key;
        s.n = m[0].n;
        s.objective_mean = m[0].mean();
        s.objective_sd = m[0].sd();
        s.return_mean = m[1].mean();
        s.return_sd = m[1].sd();
        s.expansions_mean = m[2].mean();
        s.expansions_sd = m[2].sd();
        s.seconds_mean = m[3].mean();
        s.seconds_sd = m[3].sd();
        out.push_back(s);
    }
    return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& summary) {
    auto pm = [](double mean, double sd, int precision) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(precision) << mean << " +- " << sd;
        return s.str();
    };
    out << std::left << std::setw(24) << "method" << std::setw(10) << "domain" << std::setw(12) << "planner"
        << std::setw(10) << "lambda" << std::setw(8) << "n_train" << std::setw(5) << "n" << std::setw(24)
        << "objective" << std::setw(22) << "return" << std::setw(22) << "expansions" << "seconds\n";
    for (const auto& s : summary) {
        std::ostringstream lambda;
        lambda << s.lambda;
        out << std::left << std::setw(24) << s.method << std::setw(10) << s.domain << std::setw(12) << s.planner
            << std::setw(10) << lambda.str() << std::setw(8) << s.n_train << std::setw(5) << s.n << std::setw(24)
            << pm(s.objective_mean, s.objective_sd, 2) << std::setw(22) << pm(s.return_mean, s.return_sd, 2)
            << std::setw(22) << pm(s.expansions_mean, s.expansions_sd, 1) << pm(s.seconds_mean, s.seconds_sd, 4)
            << '\n';
    }
}

void write_task_manifest(std::ostream& out, const std::vector<DomainTask>& tasks) {
    for (const auto& t : tasks) out << "id " << t.task.id << '\n' << t.manifest << "---\n";
}

std::vector<DomainTask> read_task_manifest(std::istream& in, DomainKind domain) {
    std::vector<DomainTask> tasks;
    std::string line, id, body;
    while (std::getline(in, line)) {
        if (line == "---") {
            if (id.empty()) throw std::invalid_argument("task manifest entry without an id");
            tasks.push_back(make_domain_task(domain, body, id));
            id.clear();
            body.clear();
        } else if (id.empty() && line.rfind("id ", 0) == 0) {
            id = line.substr(3);
        } else {
            body += line + '\n';
        }
    }
    if (!id.empty()) throw std::invalid_argument("task manifest ends inside entry '" + id + "'");
    return tasks;
}

}  // namespace camp
