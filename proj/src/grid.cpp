#include "soliton_forge/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace soliton_forge {

GridSpec::GridSpec(std::vector<int> d, std::vector<double> o, std::vector<double> h)
    : dims(std::move(d)), origin(std::move(o)), spacing(std::move(h))
{
    validate();
}

GridSpec GridSpec::box(const std::vector<double>& lo, const std::vector<double>& hi, double h)
{
    if (lo.size() != hi.size() || lo.empty()) throw Error("box bounds must have matching nonzero length");
    if (!(h > 0)) throw Error("spacing must be positive");
    std::vector<int> d;
    for (std::size_t a = 0; a < lo.size(); ++a) {
        if (!(hi[a] > lo[a])) throw Error("box upper bound must exceed lower bound");
        d.push_back(static_cast<int>(std::lround((hi[a] - lo[a]) / h)) + 1);
    }
    return GridSpec(d, lo, std::vector<double>(lo.size(), h));
}

void GridSpec::validate() const
{
    if (dims.empty()) throw Error("grid needs at least one axis");
    if (origin.size() != dims.size() || spacing.size() != dims.size())
        throw Error("grid dims, origin and spacing lengths differ");
    for (std::size_t a = 0; a < dims.size(); ++a) {
        if (dims[a] < 3) throw Error("every grid axis needs at least 3 nodes");
        if (!(spacing[a] > 0) || !std::isfinite(spacing[a])) throw Error("grid spacing must be positive");
        if (!std::isfinite(origin[a])) throw Error("grid origin must be finite");
    }
}

std::size_t GridSpec::size() const
{
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

std::size_t GridSpec::stride(int axis) const
{
    std::size_t s = 1;
    for (int a = ndim() - 1; a > axis; --a) s *= static_cast<std::size_t>(dims[a]);
    return s;
}

std::size_t GridSpec::flat(const std::vector<int>& idx) const
{
    std::size_t k = 0;
    for (int a = 0; a < ndim(); ++a) k = k * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(idx[a]);
    return k;
}

std::vector<int> GridSpec::unflat(std::size_t k) const
{
    std::vector<int> idx(dims.size());
    for (int a = ndim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(k % static_cast<std::size_t>(dims[a]));
        k /= static_cast<std::size_t>(dims[a]);
    }
    return idx;
}

std::vector<double> GridSpec::point(std::size_t k) const
{
    std::vector<int> idx = unflat(k);
    std::vector<double> x(idx.size());
    for (int a = 0; a < ndim(); ++a) x[a] = coord(a, idx[a]);
    return x;
}

std::vector<int> GridSpec::nearest(const std::vector<double>& x) const
{
    std::vector<int> idx(dims.size());
    for (int a = 0; a < ndim(); ++a) {
        long i = std::lround((x[a] - origin[a]) / spacing[a]);
        idx[a] = static_cast<int>(std::clamp<long>(i, 0, dims[a] - 1));
    }
    return idx;
}

bool GridSpec::same_as(const GridSpec& o) const
{
    if (dims != o.dims) return false;
    for (int a = 0; a < ndim(); ++a) {
        if (std::abs(origin[a] - o.origin[a]) > 1e-12 * (1 + std::abs(origin[a]))) return false;
        if (std::abs(spacing[a] - o.spacing[a]) > 1e-12 * spacing[a]) return false;
    }
    return true;
}

int thread_count()
{
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("SOLITON_FORGE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = std::min<int>(n, static_cast<int>(v));
    }
    return n;
}

namespace {
thread_local bool in_worker = false;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const int nt = in_worker ? 1 : std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (nt <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    const std::size_t chunk = std::max<std::size_t>(1, n / (static_cast<std::size_t>(nt) * 8));
    auto work = [&]() {
        in_worker = true;
        try {
            for (;;) {
                std::size_t b = next.fetch_add(chunk);
                if (b >= n) break;
                std::size_t e = std::min(n, b + chunk);
                for (std::size_t i = b; i < e; ++i) body(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
            next = n;
        }
        in_worker = false;
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

double op_norm(const Mat& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double op_norm(const RMat& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<RMat> svd(m);
    return svd.singularValues()(0);
}

} // namespace soliton_forge
