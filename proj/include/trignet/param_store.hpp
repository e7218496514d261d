#pragma once

#include <map>
#include <string>
#include <vector>

#include "trignet/mat.hpp"
#include "trignet/tape.hpp"

namespace trignet {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Named parameters plus per-parameter Adam state. Iteration order is
/// creation order, so updates are deterministic.
class ParamStore {
  public:
    struct Entry {
        std::string name;
        Mat value;
        Mat m;  // first moment
        Mat v;  // second moment
        long step = 0;
    };

    /// Creates a zero-initialized parameter. Throws on duplicate name.
    Mat& create(const std::string& name, int rows, int cols);
    /// Glorot-uniform init: U(-sqrt(6/(fan_in+fan_out)), +...), where the
    /// fans are given explicitly (attention score vectors have fan_out 1
    /// while being stored as columns). Seeded per name, so init does not
    /// depend on creation order.
    Mat& create_glorot(const std::string& name, int rows, int cols, int fan_in, int fan_out,
                       uint64_t seed);

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    const Mat& get(const std::string& name) const;
    Mat& get_mut(const std::string& name);

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries_mut() { return entries_; }
    size_t size() const { return entries_.size(); }
    /// Total learnable scalar count.
    uint64_t value_count() const;

  private:
    std::vector<Entry> entries_;
    std::map<std::string, int> index_;
};

/// One bias-corrected Adam update, applied in place. Parameters absent
/// from `grads` are treated as zero-gradient (moments still decay and
/// step counts still advance). Shape mismatches name the parameter.
void adam_step(ParamStore& store, const GradMap& grads, const AdamHyper& hyper);

}  // namespace trignet
