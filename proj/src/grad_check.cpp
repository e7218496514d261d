#include "trignet/grad_check.hpp"

#include <cmath>

namespace trignet {

namespace {
double eval_loss(const LossBuilder& build, const ParamStore& store) {
    Tape tape;
    NodeId loss = build(tape, store);
    const Mat& v = tape.value(loss);
    if (v.rows != 1 || v.cols != 1) throw std::runtime_error("grad_check: loss must be scalar");
    if (!std::isfinite(v.at(0, 0))) throw std::runtime_error("grad_check: non-finite loss");
    return v.at(0, 0);
}
}  // namespace

double grad_check(const LossBuilder& build, ParamStore& store, double eps) {
    if (eps == 0.0) throw std::runtime_error("grad_check: degenerate step");

    Tape tape;
    NodeId loss = build(tape, store);
    if (!std::isfinite(tape.value(loss).at(0, 0)))
        throw std::runtime_error("grad_check: non-finite loss");
    GradMap analytic = forward_backward(tape, loss, store);

    double worst = 0.0;
    for (auto& entry : store.entries_mut()) {
        const Mat& a = analytic.at(entry.name);
        for (size_t i = 0; i < entry.value.size(); ++i) {
            const double saved = entry.value.data[i];
            entry.value.data[i] = saved + eps;
            const double fp = eval_loss(build, store);
            entry.value.data[i] = saved - eps;
            const double fm = eval_loss(build, store);
            entry.value.data[i] = saved;
            const double numeric = (fp - fm) / (2.0 * eps);
            const double rel =
                std::fabs(a.data[i] - numeric) / std::max(1e-8, std::fabs(a.data[i]) + std::fabs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace trignet
