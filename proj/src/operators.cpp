#include "dmcv/operators.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>

#include "dmcv/special_math.hpp"

namespace dmcv {

namespace {
constexpr double kPi = 3.14159265358979323846;
const std::complex<double> kI(0.0, 1.0);

std::complex<double> ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// Angular factor int_{th1}^{th2} e^{i k theta} d theta.
std::complex<double> angular_integral(int k, double th1, double th2) {
    if (k == 0) return {th2 - th1, 0.0};
    return (std::exp(kI * (double)k * th2) - std::exp(kI * (double)k * th1)) / (kI * (double)k);
}
}  // namespace

Matrix fock_region_povm(int n_dim, double w1, double w2, double th1, double th2) {
    Matrix out = Matrix::Zero(n_dim, n_dim);
    for (int n = 0; n < n_dim; ++n) {
        for (int np = n; np < n_dim; ++np) {
            double a = 0.5 * (n + np) + 1.0;
            // Gamma(a) / sqrt(n! n'!) kept in log form: the ratio is O(1).
            double ratio = std::exp(std::lgamma(a) - 0.5 * std::lgamma(n + 1.0) -
                                    0.5 * std::lgamma(np + 1.0));
            double radial = 0.5 * regularized_gamma_band(a, w1, w2) * ratio;
            std::complex<double> entry = radial * angular_integral(n - np, th1, th2) / kPi;
            out(n, np) = entry;
            out(np, n) = std::conj(entry);
        }
    }
    return out;
}

double kappa_constant(int n_max, double tau_max) {
    if (n_max < 1 || tau_max <= 0.0) throw std::domain_error("kappa_constant: bad arguments");
    return 1.0 / regularized_gamma_q(n_max + 2.0, tau_max);
}

Matrix alice_marginal(double alpha) {
    Matrix rho(4, 4);
    double a2 = alpha * alpha;
    for (int x = 0; x < 4; ++x)
        for (int xp = 0; xp < 4; ++xp)
            rho(x, xp) = 0.25 * std::exp(-a2 * (1.0 - ipow(x - xp)));
    return rho;
}

TruncatedOperators build_operators(const ProtocolParams& params) {
    params.validate();
    TruncatedOperators ops;
    ops.dim_a = 4;
    ops.dim_b = params.n_max + 1;
    const int nb = ops.dim_b;
    const int nab = ops.dim_a * nb;
    const double inf = std::numeric_limits<double>::infinity();

    auto quadrant_bounds = [](int q) {
        return std::pair<double, double>{q * kPi / 2.0, (q + 1) * kPi / 2.0};
    };

    // Test POVMs.  Rotation class k pairs Alice symbol a with Bob quadrant
    // (a + k) mod 4; top is Alice-independent.
    for (int idx = 0; idx < Score::kTestAlphabet; ++idx) {
        Score c = Score::from_test_index(idx);
        Matrix povm = Matrix::Zero(nab, nab);
        for (int a = 0; a < 4; ++a) {
            Matrix block;
            if (c.kind == Score::Kind::top) {
                block = fock_region_povm(nb, params.tau_max, inf, 0.0, 2.0 * kPi);
            } else {
                auto [th1, th2] = quadrant_bounds((a + c.k) % 4);
                if (c.kind == Score::Kind::rotation)
                    block = fock_region_povm(nb, params.tau_min, params.tau_max, th1, th2);
                else
                    block = fock_region_povm(nb, 0.0, params.tau_min, th1, th2);
            }
            povm.block(a * nb, a * nb, nb, nb) = block;
        }
        ops.test_povm[idx] = povm;
    }

    // Key-round POVMs on B.
    for (int z = 0; z < 4; ++z) {
        auto [th1, th2] = quadrant_bounds(z);
        ops.key_povm[z] = fock_region_povm(nb, params.tau_min_key, inf, th1, th2);
    }
    ops.key_povm_empty = fock_region_povm(nb, 0.0, params.tau_min_key, 0.0, 2.0 * kPi);

    Matrix kept = Matrix::Zero(nb, nb);
    for (int z = 0; z < 4; ++z) kept += ops.key_povm[z];
    ops.p_ps = Matrix::Zero(nab, nab);
    for (int a = 0; a < 4; ++a) ops.p_ps.block(a * nb, a * nb, nb, nb) = kept;

    ops.rho_a_target = alice_marginal(params.alpha);
    ops.kappa = kappa_constant(params.n_max, params.tau_max);
    return ops;
}

Matrix z4_rotation_b(int dim_b) {
    Matrix r = Matrix::Zero(dim_b, dim_b);
    for (int n = 0; n < dim_b; ++n) r(n, n) = ipow(n);
    return r;
}

Matrix z4_shift_a() {
    Matrix s = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a) s((a + 1) % 4, a) = 1.0;
    return s;
}

Matrix z4_unitary_ab(int dim_b) {
    Matrix s = z4_shift_a();
    Matrix r = z4_rotation_b(dim_b);
    Matrix u = Matrix::Zero(4 * dim_b, 4 * dim_b);
    for (int a = 0; a < 4; ++a)
        for (int ap = 0; ap < 4; ++ap)
            if (s(a, ap) != 0.0) u.block(a * dim_b, ap * dim_b, dim_b, dim_b) = s(a, ap) * r;
    return u;
}

namespace {
void write_matrix(std::ofstream& out, const std::string& label, const Matrix& m) {
    out << "matrix " << label << " " << m.rows() << " " << m.cols() << "\n";
    std::vector<double> buf;
    buf.reserve(2 * m.rows() * m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            buf.push_back(m(r, c).real());
            buf.push_back(m(r, c).imag());
        }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
    out << "\n";
}
}  // namespace

void dump_operators(const TruncatedOperators& ops, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_operators: cannot open " + path);
    out << "dmcv-operators v1 complex-interleaved float64 little-endian\n";
    for (int idx = 0; idx < Score::kTestAlphabet; ++idx)
        write_matrix(out, "test_povm_" + Score::from_test_index(idx).label(), ops.test_povm[idx]);
    for (int z = 0; z < 4; ++z) write_matrix(out, "key_povm_z" + std::to_string(z), ops.key_povm[z]);
    write_matrix(out, "key_povm_empty", ops.key_povm_empty);
    write_matrix(out, "p_ps", ops.p_ps);
    write_matrix(out, "rho_a_target", ops.rho_a_target);
    Matrix kap(1, 1);
    kap(0, 0) = ops.kappa;
    write_matrix(out, "kappa", kap);
}

std::vector<std::pair<std::string, Matrix>> load_operator_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_operator_dump: cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header.rfind("dmcv-operators v1", 0) != 0)
        throw std::runtime_error("load_operator_dump: bad magic");
    std::vector<std::pair<std::string, Matrix>> out;
    std::string word;
    while (in >> word) {
        if (word != "matrix") throw std::runtime_error("load_operator_dump: bad section");
        std::string label;
        Eigen::Index rows, cols;
        in >> label >> rows >> cols;
        in.get();  // newline
        Matrix m(rows, cols);
        std::vector<double> buf(2 * rows * cols);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(double)));
        if (!in) throw std::runtime_error("load_operator_dump: truncated payload");
        size_t k = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                m(r, c) = {buf[k], buf[k + 1]};
                k += 2;
            }
        in.get();  // newline
        out.emplace_back(label, std::move(m));
    }
    return out;
}

}  // namespace dmcv
