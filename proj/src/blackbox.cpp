#include "mixval/blackbox.hpp"

#include <algorithm>
#include <csignal>
#include <cstring>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "mixval/errors.hpp"
#include "mixval/io.hpp"

namespace mixval {

void Box::validate() const {
    if (lower.size() == 0 || lower.size() != upper.size()) throw InvalidArgument("box bounds are empty or mismatched");
    if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box bounds must be finite");
    for (Index j = 0; j < lower.size(); ++j) {
        if (!(lower(j) < upper(j))) throw InvalidArgument("box needs lower < upper in coordinate " + std::to_string(j + 1));
    }
}

bool Box::contains(const VectorXd& K) const {
    return K.size() == lower.size() && (K.array() >= lower.array()).all() && (K.array() <= upper.array()).all();
}

VectorXd Box::clip(const VectorXd& K) const { return K.cwiseMax(lower).cwiseMin(upper); }

Box read_box_csv(const std::string& path) {
    const CsvTable t = parse_csv(read_text_file(path));
    const Index lo = t.column("lower");
    const Index hi = t.column("upper");
    if (lo < 0 || hi < 0) throw InvalidArgument(path + ": box csv needs lower and upper columns");
    Box box{t.values.col(lo), t.values.col(hi)};
    box.validate();
    return box;
}

VectorXd BlackBox::operator()(const VectorXd& K) {
    ++evaluations_;
    VectorXd out = evaluate(K);
    if (!out.allFinite()) throw ModelError("black box returned non-finite outputs");
    return out;
}

SubprocessBlackBox::SubprocessBlackBox(std::string command) : command_(std::move(command)) { start(); }

SubprocessBlackBox::~SubprocessBlackBox() { stop(); }

void SubprocessBlackBox::start() {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw ModelError("cannot create pipes for the black box");
    pid_ = fork();
    if (pid_ < 0) throw ModelError("cannot fork the black box process");
    if (pid_ == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = fdopen(in_pipe[1], "w");
    from_child_ = fdopen(out_pipe[0], "r");
    if (!to_child_ || !from_child_) throw ModelError("cannot open black box pipes");
}

void SubprocessBlackBox::stop() {
    if (to_child_) std::fclose(to_child_);
    if (from_child_) std::fclose(from_child_);
    to_child_ = from_child_ = nullptr;
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

VectorXd SubprocessBlackBox::evaluate(const VectorXd& K) {
    std::string line;
    for (Index j = 0; j < K.size(); ++j) line += (j ? " " : "") + format_double(K(j));
    line += "\n";
    if (std::fputs(line.c_str(), to_child_) < 0 || std::fflush(to_child_) != 0) {
        throw ModelError("black box '" + command_ + "' stopped accepting input");
    }
    std::string reply;
    int c;
    while ((c = std::fgetc(from_child_)) != EOF && c != '\n') reply += static_cast<char>(c);
    if (reply.empty() && c == EOF) throw ModelError("black box '" + command_ + "' closed its output");
    std::vector<double> values;
    std::istringstream in(reply);
    std::string tok;
    while (in >> tok) values.push_back(parse_double(tok));
    if (values.empty()) throw ModelError("black box '" + command_ + "' returned an empty line");
    return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

TableBlackBox::TableBlackBox(const MatrixXd& table, Index q) {
    if (q < 1 || table.cols() <= q) throw InvalidArgument("design table needs parameter and output columns");
    axes_.resize(static_cast<std::size_t>(q));
    for (Index j = 0; j < q; ++j) {
        auto& axis = axes_[static_cast<std::size_t>(j)];
        for (Index r = 0; r < table.rows(); ++r) axis.push_back(table(r, j));
        std::sort(axis.begin(), axis.end());
        axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
        if (axis.size() < 2) throw InvalidArgument("design table needs two values per parameter");
    }
    Index cells = 1;
    for (const auto& axis : axes_) cells *= static_cast<Index>(axis.size());
    if (cells != table.rows()) {
        throw InvalidArgument("design table is not a full tensor grid (" + std::to_string(table.rows()) + " rows, " +
                              std::to_string(cells) + " grid points)");
    }
    values_.resize(cells, table.cols() - q);
    std::vector<bool> seen(static_cast<std::size_t>(cells), false);
    for (Index r = 0; r < table.rows(); ++r) {
        Index flat = 0;
        for (Index j = 0; j < q; ++j) {
            const auto& axis = axes_[static_cast<std::size_t>(j)];
            const auto pos = std::lower_bound(axis.begin(), axis.end(), table(r, j)) - axis.begin();
            flat = flat * static_cast<Index>(axis.size()) + pos;
        }
        if (seen[static_cast<std::size_t>(flat)]) throw InvalidArgument("design table repeats a grid point");
        seen[static_cast<std::size_t>(flat)] = true;
        values_.row(flat) = table.row(r).tail(table.cols() - q);
    }
}

std::unique_ptr<TableBlackBox> TableBlackBox::from_csv(const std::string& path) {
    const CsvTable t = parse_csv(read_text_file(path));
    Index q = 0;
    while (q < static_cast<Index>(t.header.size()) && t.header[static_cast<std::size_t>(q)] == "k" + std::to_string(q + 1)) ++q;
    if (q == 0) throw InvalidArgument(path + ": design table columns must start with k1..kq");
    return std::make_unique<TableBlackBox>(t.values, q);
}

VectorXd TableBlackBox::evaluate(const VectorXd& K) {
    const auto q = axes_.size();
    if (static_cast<std::size_t>(K.size()) != q) throw InvalidArgument("design table expects " + std::to_string(q) + " parameters");
    std::vector<Index> base(q);
    std::vector<double> frac(q);
    std::vector<Index> stride(q);
    Index s = 1;
    for (std::size_t j = q; j-- > 0;) {
        stride[j] = s;
        s *= static_cast<Index>(axes_[j].size());
    }
    for (std::size_t j = 0; j < q; ++j) {
        const auto& axis = axes_[j];
        const double v = std::clamp(K(static_cast<Index>(j)), axis.front(), axis.back());
        auto pos = std::upper_bound(axis.begin(), axis.end(), v) - axis.begin() - 1;
        pos = std::clamp<long>(pos, 0, static_cast<long>(axis.size()) - 2);
        base[j] = pos;
        frac[j] = (v - axis[static_cast<std::size_t>(pos)]) / (axis[static_cast<std::size_t>(pos) + 1] - axis[static_cast<std::size_t>(pos)]);
    }
    VectorXd out = VectorXd::Zero(values_.cols());
    for (std::uint64_t corner = 0; corner < (1ULL << q); ++corner) {
        double w = 1.0;
        Index flat = 0;
        for (std::size_t j = 0; j < q; ++j) {
            const bool up = (corner >> j) & 1ULL;
            w *= up ? frac[j] : 1.0 - frac[j];
            flat += (base[j] + (up ? 1 : 0)) * stride[j];
        }
        if (w != 0.0) out += w * values_.row(flat).transpose();
    }
    return out;
}

}  // namespace mixval
