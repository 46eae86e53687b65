#include "halflab/operator.hpp"

#include <cmath>

namespace halflab {

namespace {

void finish_assembly(DiscreteOperator& op) {
  // Neumann cap: the right boundary unknown loses one coupling, modelling a
  // zero-derivative end instead of a zero-value end.
  if (op.neumann_cap && op.grid.interior_count() > 0) {
    const double h2 = op.grid.h * op.grid.h;
    const long last = op.grid.interior_count() - 1;
    if (op.n == 1) {
      op.blocks[static_cast<std::size_t>(last)] -= op.kinetic / h2;
    } else {
      for (int k = 0; k < op.n; ++k)
        op.blocks[static_cast<std::size_t>(last) * op.n * op.n +
                  static_cast<std::size_t>(k) * op.n + static_cast<std::size_t>(k)] -=
            op.kinetic / h2;
    }
  }
}

}  // namespace

DiscreteOperator assemble_operator(const PotentialProfile& q, const Grid& g,
                                   bool neumann_cap, double kinetic) {
  DiscreteOperator op;
  op.grid = g;
  op.n = q.channel_dim;
  op.kinetic = kinetic;
  op.neumann_cap = neumann_cap;
  const long m = g.interior_count();
  const double d0 = 2.0 * kinetic / (g.h * g.h);
  if (op.n == 1) {
    op.blocks.resize(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i)
      op.blocks[static_cast<std::size_t>(i)] = d0 + q.sample_scalar(g.node(i + 1));
  } else {
    op.blocks.resize(static_cast<std::size_t>(m) * op.n * op.n);
    Eigen::MatrixXd b(op.n, op.n);
    for (long i = 0; i < m; ++i) {
      b = q.sample_matrix(g.node(i + 1));
      b.diagonal().array() += d0;
      Eigen::Map<Eigen::MatrixXd>(op.blocks.data() + static_cast<std::size_t>(i) * op.n * op.n,
                                  op.n, op.n) = b;
    }
  }
  finish_assembly(op);
  return op;
}

DiscreteOperator assemble_scalar_operator(const std::function<double(double)>& q,
                                          const Grid& g, bool neumann_cap, double kinetic) {
  DiscreteOperator op;
  op.grid = g;
  op.n = 1;
  op.kinetic = kinetic;
  op.neumann_cap = neumann_cap;
  const long m = g.interior_count();
  const double d0 = 2.0 * kinetic / (g.h * g.h);
  op.blocks.resize(static_cast<std::size_t>(m));
  for (long i = 0; i < m; ++i)
    op.blocks[static_cast<std::size_t>(i)] = d0 + q(g.node(i + 1));
  finish_assembly(op);
  return op;
}

std::vector<double> f_vector(const DiscreteOperator& op) {
  const long m = op.grid.interior_count();
  std::vector<double> f(static_cast<std::size_t>(m) * op.n, 0.0);
  for (long i = 0; i < m; ++i) {
    const double r = op.grid.node(i + 1);
    double v;
    if (std::fabs(r - 2.0) <= 1e-12)
      v = 0.5;
    else
      v = (r < 2.0) ? 1.0 : 0.0;
    if (v != 0.0) f[static_cast<std::size_t>(i) * op.n] = v;
  }
  return f;
}

std::vector<std::complex<double>> resolvent_apply(const DiscreteOperator& op,
                                                  std::complex<double> z,
                                                  const std::vector<std::complex<double>>& rhs) {
  using cd = std::complex<double>;
  const long m = op.grid.interior_count();
  if (static_cast<long>(rhs.size()) != m * op.n)
    throw precondition_error("resolvent rhs has wrong length");
  const double off = op.off();
  const double off2 = off * off;
  std::vector<cd> u(rhs.size());
  if (op.n == 1) {
    std::vector<cd> dhat(static_cast<std::size_t>(m));
    std::vector<cd> y(static_cast<std::size_t>(m));
    dhat[0] = op.dval(0) - z;
    y[0] = rhs[0];
    for (long i = 1; i < m; ++i) {
      cd w = off / dhat[static_cast<std::size_t>(i - 1)];
      dhat[static_cast<std::size_t>(i)] = op.dval(i) - z - w * off;
      y[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(i)] -
                                       w * y[static_cast<std::size_t>(i - 1)];
    }
    u[static_cast<std::size_t>(m - 1)] =
        y[static_cast<std::size_t>(m - 1)] / dhat[static_cast<std::size_t>(m - 1)];
    for (long i = m - 2; i >= 0; --i)
      u[static_cast<std::size_t>(i)] =
          (y[static_cast<std::size_t>(i)] - off * u[static_cast<std::size_t>(i + 1)]) /
          dhat[static_cast<std::size_t>(i)];
    return u;
  }
  const int n = op.n;
  std::vector<Eigen::MatrixXcd> dinv(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXcd> y(static_cast<std::size_t>(m));
  Eigen::MatrixXcd dh(n, n);
  for (long i = 0; i < m; ++i) {
    dh = op.block(i).cast<cd>();
    dh.diagonal().array() -= z;
    Eigen::VectorXcd b =
        Eigen::Map<const Eigen::VectorXcd>(rhs.data() + static_cast<std::size_t>(i) * n, n);
    if (i > 0) {
      dh -= off2 * dinv[static_cast<std::size_t>(i - 1)];
      b -= off * (dinv[static_cast<std::size_t>(i - 1)] * y[static_cast<std::size_t>(i - 1)]);
    }
    dinv[static_cast<std::size_t>(i)] = dh.partialPivLu().inverse();
    y[static_cast<std::size_t>(i)] = b;
  }
  Eigen::VectorXcd prev =
      dinv[static_cast<std::size_t>(m - 1)] * y[static_cast<std::size_t>(m - 1)];
  Eigen::Map<Eigen::VectorXcd>(u.data() + static_cast<std::size_t>(m - 1) * n, n) = prev;
  for (long i = m - 2; i >= 0; --i) {
    prev = dinv[static_cast<std::size_t>(i)] *
           (y[static_cast<std::size_t>(i)] - off * prev).eval();
    Eigen::Map<Eigen::VectorXcd>(u.data() + static_cast<std::size_t>(i) * n, n) = prev;
  }
  return u;
}

std::complex<double> stieltjes(const DiscreteOperator& op, std::complex<double> z) {
  std::vector<double> f = f_vector(op);
  std::vector<std::complex<double>> rhs(f.begin(), f.end());
  std::vector<std::complex<double>> u = resolvent_apply(op, z, rhs);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += f[i] * u[i];
  return acc * op.grid.h;
}

double weighted_norm_sq(const std::vector<std::complex<double>>& u, double h) {
  double acc = 0.0;
  for (const auto& v : u) acc += std::norm(v);
  return acc * h;
}

double h1_norm_sq(const std::vector<std::complex<double>>& u, const DiscreteOperator& op) {
  const long m = op.grid.interior_count();
  const int n = op.n;
  const double h = op.grid.h;
  double l2 = 0.0, grad = 0.0;
  for (int c = 0; c < n; ++c) {
    std::complex<double> prev = 0.0;
    for (long i = 0; i < m; ++i) {
      std::complex<double> cur = u[static_cast<std::size_t>(i) * n + c];
      l2 += std::norm(cur);
      grad += std::norm(cur - prev);
      prev = cur;
    }
    grad += std::norm(prev);  // edge to the zero value at r_max
  }
  return h * l2 + grad / h;
}

Eigen::MatrixXd to_dense(const DiscreteOperator& op) {
  const long m = op.grid.interior_count();
  const int n = op.n;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m * n, m * n);
  const double off = op.off();
  for (long i = 0; i < m; ++i) {
    if (n == 1)
      T(i, i) = op.dval(i);
    else
      T.block(i * n, i * n, n, n) = op.block(i);
    if (i + 1 < m)
      for (int c = 0; c < n; ++c) {
        T(i * n + c, (i + 1) * n + c) = off;
        T((i + 1) * n + c, i * n + c) = off;
      }
  }
  return T;
}

}  // namespace halflab
