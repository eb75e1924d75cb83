#include "tmg/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "tmg/error.hpp"

namespace tmg {

BalancedPanel::BalancedPanel(int n, int T, VectorXd y, MatrixXd x,
                             std::vector<std::string> unit_ids, std::vector<std::string> time_ids)
    : n_(n), T_(T), y_(std::move(y)), x_(std::move(x)),
      unit_ids_(std::move(unit_ids)), time_ids_(std::move(time_ids)) {
    if (n_ < 2) throw Error(ErrorKind::InvalidConfig, "panel needs at least 2 units");
    if (y_.size() != static_cast<Eigen::Index>(n_) * T_ || x_.rows() != y_.size())
        throw Error(ErrorKind::InvalidConfig, "array sizes do not match n*T");
    if (x_.cols() < 1) throw Error(ErrorKind::InvalidConfig, "panel needs at least one regressor");
    if (T_ < k()) throw Error(ErrorKind::TooFewPeriods,
                              "T=" + std::to_string(T_) + " < k'+1=" + std::to_string(k()));
    if (!y_.allFinite() || !x_.allFinite()) throw Error(ErrorKind::NonFiniteValue, "panel contains NaN or Inf");
    if (unit_ids_.empty())
        for (int i = 0; i < n_; ++i) unit_ids_.push_back(std::to_string(i + 1));
    if (time_ids_.empty())
        for (int t = 0; t < T_; ++t) time_ids_.push_back(std::to_string(t + 1));
}

MatrixXd BalancedPanel::y_matrix() const {
    return Eigen::Map<const MatrixXd>(y_.data(), T_, n_);
}

VectorXd BalancedPanel::y_bar() const {
    return y_matrix().rowwise().mean();
}

MatrixXd BalancedPanel::X_bar() const {
    MatrixXd s = MatrixXd::Zero(T_, k_prime());
    for (int i = 0; i < n_; ++i) s += X(i);
    return s / n_;
}

namespace {

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    if (b == e) return false;
    auto res = std::from_chars(b, e, out);
    if (res.ec == std::errc() && res.ptr == e) return true;
    // from_chars rejects "nan"/"inf" spellings with a sign; fall back to strtod
    std::string tmp(b, e);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) { out.push_back(trim(cur)); cur.clear(); }
        else cur.push_back(c);
    }
    out.push_back(trim(cur));
    return out;
}

// Numeric labels sort numerically, anything else lexicographically.
struct LabelLess {
    bool numeric;
    bool operator()(const std::string& a, const std::string& b) const {
        if (numeric) {
            double x = 0, y = 0;
            parse_double(a, x);
            parse_double(b, y);
            if (x != y) return x < y;
        }
        return a < b;
    }
};

bool all_numeric(const std::vector<std::string>& labels) {
    double v = 0;
    return std::all_of(labels.begin(), labels.end(),
                       [&](const std::string& s) { return parse_double(s, v) && std::isfinite(v); });
}

}  // namespace

BalancedPanel load_panel(const std::vector<PanelRecord>& rows) {
    if (rows.empty()) throw Error(ErrorKind::ParseError, "no data rows");
    const std::size_t kp = rows.front().x.size();
    if (kp == 0) throw Error(ErrorKind::ParseError, "no regressor columns");

    std::vector<std::string> units, times;
    for (const auto& r : rows) {
        if (r.x.size() != kp) throw Error(ErrorKind::ParseError, "inconsistent regressor count");
        units.push_back(r.unit_id);
        times.push_back(r.time_id);
    }
    LabelLess unit_less{all_numeric(units)}, time_less{all_numeric(times)};
    std::sort(units.begin(), units.end(), unit_less);
    units.erase(std::unique(units.begin(), units.end()), units.end());
    std::sort(times.begin(), times.end(), time_less);
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const int n = static_cast<int>(units.size());
    const int T = static_cast<int>(times.size());
    std::map<std::string, int> unit_pos, time_pos;
    for (int i = 0; i < n; ++i) unit_pos[units[i]] = i;
    for (int t = 0; t < T; ++t) time_pos[times[t]] = t;

    VectorXd y(static_cast<Eigen::Index>(n) * T);
    MatrixXd x(static_cast<Eigen::Index>(n) * T, static_cast<Eigen::Index>(kp));
    std::vector<char> seen(static_cast<std::size_t>(n) * T, 0);
    for (const auto& r : rows) {
        const std::size_t row = static_cast<std::size_t>(unit_pos[r.unit_id]) * T + time_pos[r.time_id];
        if (seen[row]) throw Error(ErrorKind::DuplicateCell, "unit " + r.unit_id + ", time " + r.time_id);
        seen[row] = 1;
        if (!std::isfinite(r.y)) throw Error(ErrorKind::NonFiniteValue, "y at unit " + r.unit_id + ", time " + r.time_id);
        y(row) = r.y;
        for (std::size_t j = 0; j < kp; ++j) {
            if (!std::isfinite(r.x[j]))
                throw Error(ErrorKind::NonFiniteValue,
                            "x" + std::to_string(j + 1) + " at unit " + r.unit_id + ", time " + r.time_id);
            x(row, j) = r.x[j];
        }
    }
    for (std::size_t row = 0; row < seen.size(); ++row)
        if (!seen[row])
            throw Error(ErrorKind::UnbalancedPanel, "missing cell unit " + units[row / T] + ", time " + times[row % T]);
    if (T < static_cast<int>(kp) + 1)
        throw Error(ErrorKind::TooFewPeriods,
                    "T=" + std::to_string(T) + " < k'+1=" + std::to_string(kp + 1));
    return BalancedPanel(n, T, std::move(y), std::move(x), std::move(units), std::move(times));
}

std::vector<PanelRecord> read_panel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty input");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
    auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "unit_id" || header[1] != "time_id" || header[2] != "y")
        throw Error(ErrorKind::ParseError, "header must be unit_id,time_id,y,x1[,x2,...]");
    const std::size_t cols = header.size();

    std::vector<PanelRecord> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split_csv(line);
        if (f.size() != cols)
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                                   std::to_string(cols) + " fields, got " + std::to_string(f.size()));
        PanelRecord r;
        r.unit_id = f[0];
        r.time_id = f[1];
        if (!parse_double(f[2], r.y))
            throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": bad y value '" + f[2] + "'");
        r.x.resize(cols - 3);
        for (std::size_t j = 3; j < cols; ++j)
            if (!parse_double(f[j], r.x[j - 3]))
                throw Error(ErrorKind::ParseError,
                            "line " + std::to_string(lineno) + ": bad value '" + f[j] + "' in column " + header[j]);
        rows.push_back(std::move(r));
    }
    return rows;
}

BalancedPanel load_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
    return load_panel(read_panel_csv(in));
}

void write_panel_csv(std::ostream& out, const BalancedPanel& panel) {
    out << "unit_id,time_id,y";
    for (int j = 0; j < panel.k_prime(); ++j) out << ",x" << (j + 1);
    out << '\n' << std::setprecision(17);
    for (int i = 0; i < panel.n(); ++i)
        for (int t = 0; t < panel.T(); ++t) {
            out << panel.unit_ids()[i] << ',' << panel.time_ids()[t] << ',' << panel.y(i)(t);
            for (int j = 0; j < panel.k_prime(); ++j) out << ',' << panel.X(i)(t, j);
            out << '\n';
        }
}

}  // namespace tmg
