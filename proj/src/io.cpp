#include "mixval/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mixval/errors.hpp"
#include "mixval/random.hpp"

namespace mixval {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw NumericalError("could not format a double");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
        throw InvalidArgument("not a number: '" + text + "'");
    }
    return v;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << content;
    if (!out) throw InvalidArgument("write failed for " + path);
}

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

Index CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<Index>(j);
    }
    return -1;
}

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        auto fields = split(line, ',');
        if (table.header.empty()) {
            for (auto& f : fields) table.header.push_back(trim(f));
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        for (auto& f : fields) {
            try {
                row.push_back(parse_double(f));
            } catch (const InvalidArgument&) {
                throw InvalidArgument("csv line " + std::to_string(line_no) + ": not a number: '" + f + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw InvalidArgument("csv has no header");
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return table;
}

std::string format_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t j = 0; j < table.header.size(); ++j) out += (j ? "," : "") + table.header[j];
    out += "\n";
    for (Index i = 0; i < table.values.rows(); ++i) {
        for (Index j = 0; j < table.values.cols(); ++j) out += (j ? "," : "") + format_double(table.values(i, j));
        out += "\n";
    }
    return out;
}

Dataset read_dataset_csv(const std::string& path) {
    const CsvTable t = parse_csv(read_text_file(path));
    const Index ycol = t.column("y");
    if (ycol < 0) throw InvalidArgument(path + ": dataset csv needs a 'y' column");
    Dataset data;
    std::vector<Index> xcols;
    for (Index j = 0; j < static_cast<Index>(t.header.size()); ++j) {
        if (j != ycol) xcols.push_back(j);
    }
    data.X.resize(t.values.rows(), static_cast<Index>(xcols.size()));
    for (std::size_t c = 0; c < xcols.size(); ++c) data.X.col(static_cast<Index>(c)) = t.values.col(xcols[c]);
    data.y = t.values.col(ycol);
    return data;
}

std::string dataset_csv(const Dataset& data) {
    CsvTable t;
    for (Index j = 0; j < data.d(); ++j) t.header.push_back("x" + std::to_string(j + 1));
    t.header.emplace_back("y");
    t.values.resize(data.n(), data.d() + 1);
    t.values << data.X, data.y;
    return format_csv(t);
}

MatrixXd read_matrix_csv(const std::string& path) { return parse_csv(read_text_file(path)).values; }

std::string matrix_csv(const MatrixXd& M, const std::vector<std::string>& header) {
    if (static_cast<Index>(header.size()) != M.cols()) throw InvalidArgument("matrix_csv: header size mismatch");
    return format_csv({header, M});
}

std::string draws_csv(const PosteriorDraws& draws) {
    if (draws.empty()) return "iter\n";
    const auto& first = draws.states.front();
    const Index p = first.theta.size();
    const Index n = first.delta.size();
    std::string out = "iter";
    for (Index j = 0; j < p; ++j) out += ",theta_" + std::to_string(j + 1);
    out += ",lambda,alpha,k,gamma,m";
    for (Index i = 0; i < n; ++i) out += ",delta_" + std::to_string(i + 1);
    for (Index i = 0; i < n; ++i) out += ",zeta_" + std::to_string(i + 1);
    out += "\n";
    for (std::size_t t = 0; t < draws.size(); ++t) {
        const auto& s = draws.states[t];
        out += std::to_string(draws.iterations[t]);
        for (Index j = 0; j < p; ++j) out += "," + format_double(s.theta(j));
        out += "," + format_double(s.lambda) + "," + format_double(s.alpha) + "," + format_double(s.k) + "," +
               format_double(s.gamma) + "," + std::to_string(s.m());
        for (Index i = 0; i < n; ++i) out += "," + format_double(s.delta(i));
        for (Index i = 0; i < n; ++i) out += s.zeta[static_cast<std::size_t>(i)] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

PosteriorDraws parse_draws_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const Index lam = t.column("lambda");
    if (t.column("iter") != 0 || lam < 1) throw InvalidArgument("not a draws csv: missing iter/lambda columns");
    const Index p = lam - 1;
    const Index first_delta = lam + 5;
    const Index rest = static_cast<Index>(t.header.size()) - first_delta;
    if (rest < 2 || rest % 2 != 0) throw InvalidArgument("draws csv: delta and zeta columns do not pair up");
    const Index n = rest / 2;
    PosteriorDraws draws;
    for (Index r = 0; r < t.values.rows(); ++r) {
        MixtureState s;
        draws.iterations.push_back(static_cast<long>(t.values(r, 0)));
        s.theta = t.values.row(r).segment(1, p).transpose();
        s.lambda = t.values(r, lam);
        s.alpha = t.values(r, lam + 1);
        s.k = t.values(r, lam + 2);
        s.gamma = t.values(r, lam + 3);
        s.delta = t.values.row(r).segment(first_delta, n).transpose();
        s.zeta.resize(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) s.zeta[static_cast<std::size_t>(i)] = t.values(r, first_delta + n + i) != 0.0;
        s.validate(n, p);
        draws.states.push_back(std::move(s));
    }
    return draws;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    auto flush = [&] {
        if (!trim(cur).empty()) out.push_back(parse_double(cur));
        cur.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t' || c == ';') {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

}  // namespace mixval
