#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mixval {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Axis-aligned parameter box [lower, upper].
struct Box {
    VectorXd lower, upper;

    Index dim() const { return lower.size(); }
    void validate() const;
    bool contains(const VectorXd& K) const;
    VectorXd clip(const VectorXd& K) const;
    VectorXd centre() const { return 0.5 * (lower + upper); }
    VectorXd width() const { return upper - lower; }
};

/// Reads a box CSV with header lower,upper and one row per parameter.
Box read_box_csv(const std::string& path);

/// A deterministic map from a parameter vector to the outputs at the observed
/// operating points. Counts its evaluations.
class BlackBox {
public:
    virtual ~BlackBox() = default;

    VectorXd operator()(const VectorXd& K);
    long evaluations() const { return evaluations_; }
    /// True when evaluate may be called from several threads at once.
    virtual bool concurrent() const { return false; }

protected:
    virtual VectorXd evaluate(const VectorXd& K) = 0;

private:
    std::atomic<long> evaluations_{0};
};

class FunctionBlackBox : public BlackBox {
public:
    explicit FunctionBlackBox(std::function<VectorXd(const VectorXd&)> f) : f_(std::move(f)) {}
    bool concurrent() const override { return true; }

protected:
    VectorXd evaluate(const VectorXd& K) override { return f_(K); }

private:
    std::function<VectorXd(const VectorXd&)> f_;
};

/// Runs `command` through /bin/sh once and keeps it alive: each evaluation
/// writes one line of whitespace-separated parameters to its standard input
/// and reads one line of outputs back.
class SubprocessBlackBox : public BlackBox {
public:
    explicit SubprocessBlackBox(std::string command);
    ~SubprocessBlackBox() override;
    SubprocessBlackBox(const SubprocessBlackBox&) = delete;
    SubprocessBlackBox& operator=(const SubprocessBlackBox&) = delete;

protected:
    VectorXd evaluate(const VectorXd& K) override;

private:
    void start();
    void stop();

    std::string command_;
    int pid_ = -1;
    std::FILE* to_child_ = nullptr;
    std::FILE* from_child_ = nullptr;
};

/// Precomputed outputs on a full tensor grid of parameter values, interpolated
/// multilinearly. Table columns: k1..kq then one column per output; every
/// combination of the distinct kj values must appear exactly once.
class TableBlackBox : public BlackBox {
public:
    TableBlackBox(const MatrixXd& table, Index q);
    static std::unique_ptr<TableBlackBox> from_csv(const std::string& path);
    bool concurrent() const override { return true; }

    const std::vector<std::vector<double>>& axes() const { return axes_; }

protected:
    VectorXd evaluate(const VectorXd& K) override;

private:
    std::vector<std::vector<double>> axes_;
    MatrixXd values_;  ///< row = flattened grid index (first axis slowest)
};

}  // namespace mixval
