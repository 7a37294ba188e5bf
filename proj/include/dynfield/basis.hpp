#pragma once

#include <Eigen/Core>
#include <vector>

namespace dynfield {

/// Monomial x^px * y^py * t^pt on normalized coordinates in [-1, 1]^3.
struct PolyTerm {
    int px = 0;
    int py = 0;
    int pt = 0;
};

/// Polynomial feature map B : [-1,1]^3 -> R^M shared by all partitions.
class PolyBasis {
  public:
    explicit PolyBasis(std::vector<PolyTerm> terms);

    /// Tensor product of the total-degree-<= space_degree bivariate
    /// monomials with the univariate time monomials of degree
    /// <= time_degree. Defaults give 10 x 4 = 40 features. Space terms are
    /// ordered by total degree then descending x power; the time index
    /// varies fastest.
    static PolyBasis tensor_product(int space_degree = 3, int time_degree = 3);

    int size() const { return static_cast<int>(terms_.size()); }
    const std::vector<PolyTerm>& terms() const { return terms_; }

    /// values: M x n for points given as 3 x n normalized coordinates.
    void eval(const Eigen::Matrix3Xd& pts, Eigen::MatrixXd& values) const;

    /// values: M x n; derivs: M x 3n with derivative blocks
    /// [d/dx | d/dy | d/dt] in normalized coordinates.
    void eval_with_grad(const Eigen::Matrix3Xd& pts, Eigen::MatrixXd& values,
                        Eigen::MatrixXd& derivs) const;

  private:
    std::vector<PolyTerm> terms_;
    int max_degree_ = 0;
};

}  // namespace dynfield
