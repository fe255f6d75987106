#include "eslope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "eslope/errors.hpp"

namespace eslope {

namespace {

IndexSet sorted_unique(IndexSet s)
{
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

std::size_t overlap(const IndexSet& a, const IndexSet& b)
{
    const auto sa = sorted_unique(a);
    const auto sb = sorted_unique(b);
    IndexSet common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    return common.size();
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

// Sums in sorted order so the result does not depend on record order.
Moments moments(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    Moments m;
    if (values.empty()) {
        return m;
    }
    for (double v : values) {
        m.mean += v;
    }
    m.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - m.mean) * (v - m.mean);
        }
        m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return m;
}

} // namespace

double fdp(const IndexSet& estimated, const IndexSet& truth)
{
    const auto est = sorted_unique(estimated);
    if (est.empty()) {
        return 0.0;
    }
    const auto false_count = est.size() - overlap(est, truth);
    return static_cast<double>(false_count) / static_cast<double>(est.size());
}

double power_prop(const IndexSet& estimated, const IndexSet& truth)
{
    const auto t = sorted_unique(truth);
    if (t.empty()) {
        throw DomainError("power_prop: empty true support");
    }
    return static_cast<double>(overlap(estimated, t)) / static_cast<double>(t.size());
}

double mse(const Vector& a, const Vector& b)
{
    detail::require_same_size(static_cast<std::size_t>(a.size()),
                              static_cast<std::size_t>(b.size()), "mse");
    return (a - b).squaredNorm();
}

ReplicationRecord score(const IndexSet& estimated, const IndexSet& truth, const Vector& beta_hat,
                        const Vector& beta_star, const Vector& mu_hat, const Vector& mu_star)
{
    ReplicationRecord r;
    const auto est = sorted_unique(estimated);
    r.discoveries = est.size();
    r.false_discoveries = est.size() - overlap(est, truth);
    r.fdp = fdp(est, truth);
    if (!truth.empty()) {
        r.power = power_prop(est, truth);
    }
    r.mse_beta = mse(beta_hat, beta_star);
    r.mse_mu = mse(mu_hat, mu_star);
    return r;
}

MetricsSummary aggregate(std::vector<ReplicationRecord> records)
{
    if (records.empty()) {
        throw DomainError("aggregate: no records");
    }
    std::vector<double> f, pw, mb, mm;
    for (const auto& r : records) {
        f.push_back(r.fdp);
        if (r.power) {
            pw.push_back(*r.power);
        }
        mb.push_back(r.mse_beta);
        mm.push_back(r.mse_mu);
    }
    MetricsSummary s;
    s.replications = records.size();
    s.power_count = pw.size();
    const auto mf = moments(f), mp = moments(pw), mbeta = moments(mb), mmu = moments(mm);
    s.mean_fdr = mf.mean;
    s.sd_fdr = mf.sd;
    s.mean_power = mp.mean;
    s.sd_power = mp.sd;
    s.mean_mse_beta = mbeta.mean;
    s.sd_mse_beta = mbeta.sd;
    s.mean_mse_mu = mmu.mean;
    s.sd_mse_mu = mmu.sd;
    s.records = std::move(records);
    return s;
}

} // namespace eslope
