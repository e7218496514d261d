#include "trignet/param_store.hpp"

#include <cmath>

#include "trignet/rng.hpp"

namespace trignet {

Mat& ParamStore::create(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw std::runtime_error("ParamStore: duplicate parameter " + name);
    Entry e;
    e.name = name;
    e.value = Mat(rows, cols);
    e.m = Mat(rows, cols);
    e.v = Mat(rows, cols);
    index_[name] = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
    return entries_.back().value;
}

Mat& ParamStore::create_glorot(const std::string& name, int rows, int cols, int fan_in,
                               int fan_out, uint64_t seed) {
    Mat& m = create(name, rows, cols);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    SplitMix64 rng(stable_hash(seed, name));
    for (double& v : m.data) v = rng.next_uniform(-limit, limit);
    return m;
}

const Mat& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("ParamStore: unknown parameter " + name);
    return entries_[it->second].value;
}

Mat& ParamStore::get_mut(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error("ParamStore: unknown parameter " + name);
    return entries_[it->second].value;
}

uint64_t ParamStore::value_count() const {
    uint64_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

void adam_step(ParamStore& store, const GradMap& grads, const AdamHyper& hyper) {
    if (!(hyper.lr > 0.0) && hyper.lr != 0.0)
        throw std::runtime_error("adam_step: learning rate must be >= 0");
    if (!(hyper.beta1 > 0.0 && hyper.beta1 < 1.0 && hyper.beta2 > 0.0 && hyper.beta2 < 1.0))
        throw std::runtime_error("adam_step: betas must lie in (0, 1)");

    for (auto& e : store.entries_mut()) {
        const Mat* g = nullptr;
        auto it = grads.find(e.name);
        if (it != grads.end()) {
            if (!it->second.same_shape(e.value))
                throw std::runtime_error("adam_step: gradient shape mismatch for " + e.name +
                                         " (" + shape_str(it->second) + " vs " +
                                         shape_str(e.value) + ")");
            g = &it->second;
        }
        e.step += 1;
        const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(e.step));
        const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(e.step));
        for (size_t i = 0; i < e.value.size(); ++i) {
            const double gi = g ? g->data[i] : 0.0;
            e.m.data[i] = hyper.beta1 * e.m.data[i] + (1.0 - hyper.beta1) * gi;
            e.v.data[i] = hyper.beta2 * e.v.data[i] + (1.0 - hyper.beta2) * gi * gi;
            const double mhat = e.m.data[i] / bc1;
            const double vhat = e.v.data[i] / bc2;
            e.value.data[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
        }
    }
}

}  // namespace trignet
