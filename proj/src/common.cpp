#include "nonloc/common.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

namespace nonloc {

namespace {

GaussRule build_rule(int m)
{
    GaussRule r;
    r.x.resize(m);
    r.w.resize(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        r.x[i] = -z;
        r.x[m - 1 - i] = z;
        r.w[i] = r.w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (m % 2 == 1)
        r.x[m / 2] = 0.0;
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int m)
{
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    if (m < 1)
        throw InvalidArgument("Gauss-Legendre rule needs at least one node");
    std::lock_guard lock(mtx);
    auto it = cache.find(m);
    if (it == cache.end())
        it = cache.emplace(m, build_rule(m)).first;
    return it->second;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = std::min<std::size_t>(hw, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(err_mtx);
                    if (!err)
                        err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

}  // namespace nonloc
