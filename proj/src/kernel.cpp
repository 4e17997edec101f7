#include "gprel/kernel.hpp"

#include <cmath>
#include <string>

#include "gprel/errors.hpp"

namespace gprel {

KernelHypers KernelHypers::from_natural(double sigma_f, const Eigen::VectorXd& lengthscales,
                                        double constant, double sigma_n) {
  KernelHypers h;
  h.log_sigma_f = std::log(sigma_f);
  h.log_lengthscales = lengthscales.array().log().matrix();
  h.log_const = std::log(constant);
  h.log_sigma_n = std::log(sigma_n);
  validate(h);
  return h;
}

KernelHypers KernelHypers::unpack(const Eigen::VectorXd& packed) {
  if (packed.size() < 3) throw DimensionMismatch("KernelHypers::unpack: vector too short");
  const Eigen::Index p = packed.size() - 3;
  KernelHypers h;
  h.log_sigma_f = packed(0);
  h.log_lengthscales = packed.segment(1, p);
  h.log_const = packed(p + 1);
  h.log_sigma_n = packed(p + 2);
  return h;
}

Eigen::VectorXd KernelHypers::pack() const {
  Eigen::VectorXd v(packed_size());
  v(0) = log_sigma_f;
  v.segment(1, dim()) = log_lengthscales;
  v(dim() + 1) = log_const;
  v(dim() + 2) = log_sigma_n;
  return v;
}

double KernelHypers::sigma_f() const { return std::exp(log_sigma_f); }
double KernelHypers::constant() const { return std::exp(log_const); }
double KernelHypers::sigma_n() const { return std::exp(log_sigma_n); }
Eigen::VectorXd KernelHypers::lengthscales() const {
  return log_lengthscales.array().exp().matrix();
}

KernelHypers KernelHypers::select(const std::vector<int>& dims) const {
  KernelHypers h = *this;
  h.log_lengthscales.resize(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] < 0 || dims[k] >= dim()) throw IndexOutOfRange("KernelHypers::select");
    h.log_lengthscales(static_cast<Eigen::Index>(k)) = log_lengthscales(dims[k]);
  }
  return h;
}

void validate(const KernelHypers& h) {
  const Eigen::VectorXd natural = h.pack().array().exp().matrix();
  if (!natural.allFinite() || (natural.array() <= 0.0).any()) {
    throw InvalidArgument("kernel hyperparameters must be positive and finite");
  }
}

namespace {

void check_dim(const KernelHypers& h, Eigen::Index cols, const char* what) {
  if (cols != h.dim()) {
    throw DimensionMismatch(std::string(what) + ": inputs have " + std::to_string(cols) +
                            " columns, kernel expects " + std::to_string(h.dim()));
  }
}

// Inputs divided columnwise by their length-scales.
Eigen::MatrixXd scaled(const KernelHypers& h, const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd inv_l = (-h.log_lengthscales.array()).exp().matrix().transpose();
  return x.array().rowwise() * inv_l.array();
}

}  // namespace

double kernel_eval(const KernelHypers& h, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  check_dim(h, x.size(), "kernel_eval");
  check_dim(h, x2.size(), "kernel_eval");
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x(i) - x2(i)) * std::exp(-h.log_lengthscales(i));
    r2 += d * d;
  }
  const double sf2 = std::exp(2.0 * h.log_sigma_f);
  const double c2 = std::exp(2.0 * h.log_const);
  return c2 + sf2 * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const KernelHypers& h, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& x2) {
  check_dim(h, x.cols(), "kernel_matrix");
  check_dim(h, x2.cols(), "kernel_matrix");
  const Eigen::MatrixXd a = scaled(h, x);
  const Eigen::MatrixXd b = scaled(h, x2);
  const double sf2 = std::exp(2.0 * h.log_sigma_f);
  const double c2 = std::exp(2.0 * h.log_const);
  Eigen::MatrixXd k(x.rows(), x2.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double diff = a(i, d) - b(j, d);
        r2 += diff * diff;
      }
      k(i, j) = c2 + sf2 * std::exp(-0.5 * r2);
    }
  }
  return k;
}

Eigen::MatrixXd kernel_matrix(const KernelHypers& h, const Eigen::MatrixXd& x) {
  check_dim(h, x.cols(), "kernel_matrix");
  const Eigen::MatrixXd a = scaled(h, x);
  const double sf2 = std::exp(2.0 * h.log_sigma_f);
  const double c2 = std::exp(2.0 * h.log_const);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = c2 + sf2;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const double diff = a(i, d) - a(j, d);
        r2 += diff * diff;
      }
      k(i, j) = c2 + sf2 * std::exp(-0.5 * r2);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

std::vector<Eigen::MatrixXd> kernel_matrix_grads(const KernelHypers& h, const Eigen::MatrixXd& x) {
  check_dim(h, x.cols(), "kernel_matrix_grads");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::MatrixXd a = scaled(h, x);
  const double sf2 = std::exp(2.0 * h.log_sigma_f);
  const double c2 = std::exp(2.0 * h.log_const);

  // se(i, j) = sigma_f^2 exp(-r^2 / 2)
  Eigen::MatrixXd se(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    se(j, j) = sf2;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < p; ++d) {
        const double diff = a(i, d) - a(j, d);
        r2 += diff * diff;
      }
      se(i, j) = se(j, i) = sf2 * std::exp(-0.5 * r2);
    }
  }

  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(static_cast<std::size_t>(p + 2));
  grads.push_back(2.0 * se);
  for (Eigen::Index d = 0; d < p; ++d) {
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      g(j, j) = 0.0;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double diff = a(i, d) - a(j, d);
        g(i, j) = g(j, i) = se(i, j) * diff * diff;
      }
    }
    grads.push_back(std::move(g));
  }
  grads.push_back(Eigen::MatrixXd::Constant(n, n, 2.0 * c2));
  return grads;
}

}  // namespace gprel
