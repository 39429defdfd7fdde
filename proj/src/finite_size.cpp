#include "dmcv/finite_size.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dmcv/special_math.hpp"

namespace dmcv {

bool AcceptanceSet::contains(const Eigen::VectorXd& freq, double tol) const {
    for (int i = 0; i < freq.size(); ++i)
        if (freq(i) < lower(i) - tol || freq(i) > upper(i) + tol) return false;
    return true;
}

void AcceptanceSet::validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw std::invalid_argument("AcceptanceSet: malformed bounds");
    for (int i = 0; i < lower.size(); ++i) {
        if (lower(i) < 0.0 || upper(i) > 1.0 || lower(i) > upper(i))
            throw std::invalid_argument("AcceptanceSet: endpoints outside [0,1]");
    }
    if (lower.sum() > 1.0 + 1e-12 || upper.sum() < 1.0 - 1e-12)
        throw std::invalid_argument("AcceptanceSet: empty intersection with the simplex");
}

GeatTerms geat_bound(const AffineScoreFunction& f, double h, double n_rounds, double beta,
                     int d_z, double eps_s, double eps_ea) {
    if (!(beta > 0.0 && beta < 0.5)) throw std::domain_error("geat_bound: beta outside (0,1/2)");
    if (!(eps_s > 0.0 && eps_s < 1.0)) throw std::domain_error("geat_bound: eps_s outside (0,1)");
    if (!(eps_ea > 0.0 && eps_ea < 1.0))
        throw std::domain_error("geat_bound: eps_ea outside (0,1)");
    if (!f.full_alphabet) throw std::invalid_argument("geat_bound: f must be a min-tradeoff function");

    const double ln2 = std::log(2.0);
    double v = std::log2(2.0 * d_z * d_z + 1.0) + std::sqrt(2.0 + f.var_upper);

    // K_beta in log space; the spread Max[f] - Min_Sigma[f] can be large.
    double spread = 2.0 * std::log2(static_cast<double>(d_z)) + f.max_f - f.min_sigma_lower;
    double e_arg = spread * ln2;  // ln(2^spread)
    double log_inner = e_arg > 4.0 ? e_arg + std::log1p(std::exp(2.0 - e_arg))
                                   : std::log(std::exp(e_arg) + std::exp(2.0));
    double bfac = beta / (1.0 - beta);
    double ln_kbeta = 3.0 * std::log(1.0 - beta) - std::log(6.0 * ln2) -
                      3.0 * std::log(1.0 - 2.0 * beta) + bfac * spread * ln2 +
                      3.0 * std::log(log_inner);
    double k_beta = std::exp(ln_kbeta);

    // second-order terms (positive quantities, subtracted from N h)
    double t_var = bfac * (ln2 / 2.0) * v * v;
    double ln_tk = std::log(n_rounds) + 2.0 * std::log(bfac) + ln_kbeta;
    double t_k = ln_tk > 700.0 ? std::numeric_limits<double>::infinity() : n_rounds * bfac * bfac * k_beta;
    // smoothing and event-conditioning cost; Pr[Omega] -> eps_ea
    double t_eps = -(std::log2(1.0 - std::sqrt(1.0 - eps_s * eps_s)) +
                     (1.0 + beta) * std::log2(eps_ea)) /
                   beta;

    GeatTerms out;
    out.v = v;
    out.k_beta = k_beta;
    out.first_order = n_rounds * h;
    out.second_order = t_var + t_k + t_eps;
    out.bound_bits = out.first_order - out.second_order;
    return out;
}

double floor_over_acceptance(const AffineScoreFunction& f, const AcceptanceSet& acc) {
    acc.validate();
    if (f.coeff.size() != acc.lower.size())
        throw std::invalid_argument("floor_over_acceptance: dimension mismatch");
    const int n = static_cast<int>(f.coeff.size());
    // start from the lower bounds, then pour the remaining mass into the
    // smallest coefficients first
    Eigen::VectorXd x = acc.lower;
    double remaining = 1.0 - x.sum();
    if (remaining < -1e-12) throw std::invalid_argument("floor_over_acceptance: empty set");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f.coeff(a) < f.coeff(b); });
    for (int idx : order) {
        if (remaining <= 0.0) break;
        double room = acc.upper(idx) - x(idx);
        double add = std::min(room, remaining);
        x(idx) += add;
        remaining -= add;
    }
    if (remaining > 1e-12) throw std::invalid_argument("floor_over_acceptance: empty set");
    return f.evaluate(x);
}

double abort_tail_high(double p, double n_rounds, double zeta) {
    // Pr[freq > p + zeta] <= 1 - F(N, p, floor(N (p + zeta)))
    double k = std::floor(n_rounds * (p + zeta));
    if (k >= n_rounds) return 0.0;
    if (k < 0.0) k = 0.0;
    double q = k / n_rounds;
    double d = 0.0;
    if (q > 0.0) d += q * std::log(q / p);
    if (q < 1.0) d += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
    if (d < 0.0) d = 0.0;
    double s = (q > p) ? 1.0 : (q < p ? -1.0 : 0.0);
    return 1.0 - normal_cdf(s * std::sqrt(2.0 * n_rounds * d));
}

double abort_tail_low(double p, double n_rounds, double zeta_down) {
    // Pr[freq < p - zeta'] <= F(N, p, ceil(N (p - zeta'))) since
    // CDF(k) <= F(N, p, k + 1)
    double edge = std::ceil(n_rounds * (p - zeta_down));
    if (edge <= 0.0) return 0.0;  // freq < 0 is impossible
    double k = edge;              // = (ceil(...) - 1) + 1
    if (k > n_rounds) k = n_rounds;
    double q = k / n_rounds;
    double d = 0.0;
    if (q > 0.0) d += q * std::log(q / p);
    if (q < 1.0) d += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
    if (d < 0.0) d = 0.0;
    double s = (q > p) ? 1.0 : (q < p ? -1.0 : 0.0);
    return normal_cdf(s * std::sqrt(2.0 * n_rounds * d));
}

namespace {
double bisect_tolerance(double p, double n_rounds, double side_budget, double cap,
                        double (*tail)(double, double, double)) {
    if (tail(p, n_rounds, cap) > side_budget) return cap;  // infeasible, caller flags
    double lo = 0.0, hi = cap;
    if (tail(p, n_rounds, 0.0) <= side_budget) return 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tail(p, n_rounds, mid) <= side_budget)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-15) break;
    }
    return hi;
}
}  // namespace

ToleranceResult completeness_tolerance(double p, double n_rounds, double budget) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("completeness_tolerance: p outside (0,1)");
    if (!(budget > 0.0)) throw std::domain_error("completeness_tolerance: budget <= 0");
    ToleranceResult r;
    double side = 0.5 * budget;
    r.zeta_up = bisect_tolerance(p, n_rounds, side, 1.0 - p, &abort_tail_high);
    r.zeta_down = bisect_tolerance(p, n_rounds, side, p, &abort_tail_low);
    r.feasible = abort_tail_high(p, n_rounds, r.zeta_up) <= side &&
                 abort_tail_low(p, n_rounds, r.zeta_down) <= side;
    return r;
}

AcceptanceSet build_acceptance(const Eigen::VectorXd& p_full, double n_rounds,
                               const Eigen::VectorXd& budgets) {
    if (p_full.size() != budgets.size())
        throw std::invalid_argument("build_acceptance: size mismatch");
    AcceptanceSet acc;
    acc.lower = Eigen::VectorXd::Zero(p_full.size());
    acc.upper = Eigen::VectorXd::Zero(p_full.size());
    for (int c = 0; c < p_full.size(); ++c) {
        double p = std::min(std::max(p_full(c), 1e-300), 1.0 - 1e-16);
        auto tol = completeness_tolerance(p, n_rounds, budgets(c));
        acc.lower(c) = std::max(0.0, p_full(c) - tol.zeta_down);
        acc.upper(c) = std::min(1.0, p_full(c) + tol.zeta_up);
    }
    acc.validate();
    return acc;
}

long long ev_hash_length(double eps_cor) {
    if (!(eps_cor > 0.0 && eps_cor < 1.0)) throw std::domain_error("ev_hash_length: bad eps_cor");
    return static_cast<long long>(std::ceil(std::log2(1.0 / eps_cor)));
}

double key_length(double hmin_bound, double leak_ec, double l_ev, double eps_s, double eps_ea,
                  double eps_sec) {
    if (!(eps_sec > 0.0 && eps_sec < 1.0)) throw std::domain_error("key_length: bad eps_sec");
    if (eps_ea > eps_sec) return 0.0;
    double margin = eps_sec - 2.0 * eps_s;
    if (margin <= 0.0) return 0.0;
    double l = std::floor(hmin_bound - leak_ec - l_ev + 2.0 + 2.0 * std::log2(margin));
    return l > 0.0 ? l : 0.0;
}

std::string KeyRateReport::to_json() const {
    nlohmann::json j;
    j["loss_db"] = loss_db;
    j["n_rounds"] = n_rounds;
    j["alpha"] = alpha;
    j["gamma"] = gamma;
    j["beta"] = beta;
    j["nu_c"] = nu_c;
    j["nu_l"] = nu_l;
    j["nu_u"] = nu_u;
    j["chi_dual"] = chi_dual;
    j["h"] = h;
    j["g_at_q"] = g_at_q;
    j["v_term"] = v_term;
    j["k_beta"] = k_beta;
    j["hmin_bound"] = hmin_bound;
    j["leak_ec"] = leak_ec;
    j["l_ev"] = l_ev;
    j["key_len"] = key_len;
    j["rate"] = rate;
    j["eps"] = {{"s", eps_s}, {"ea", eps_ea}, {"sec", eps_sec}, {"cor", eps_cor},
                {"com_pe", eps_com_pe}};
    j["entropy_certified"] = entropy_certified;
    j["g_corr_honest"] = g_corr_honest;
    j["status"] = status;
    return j.dump();
}

std::string KeyRateReport::csv_header() {
    return "loss_db,N,alpha,gamma,beta,nu_c,nu_l,nu_u,chi_dual,h,V,Kbeta,leak_ec,l_ev,"
           "key_len,rate,status";
}

std::string KeyRateReport::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << loss_db << ',' << n_rounds << ',' << alpha << ',' << gamma << ',' << beta << ','
       << nu_c << ',' << nu_l << ',' << nu_u << ',' << chi_dual << ',' << h << ',' << v_term
       << ',' << k_beta << ',' << leak_ec << ',' << l_ev << ',' << key_len << ',' << rate << ','
       << status;
    return os.str();
}

}  // namespace dmcv
