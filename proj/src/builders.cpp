#include <cmath>
#include <map>

#include <json.hpp>

#include "polynet/constructor.hpp"

namespace polynet {

namespace {

struct Bank {
  Layer faces;
  Layer gates;
};

// First two layers for a set of clipped gates. With `share`, half-spaces that
// coincide across gates are evaluated once and their output weights summed.
Bank gate_bank(const std::vector<ConvexPolytope>& polys, const std::vector<GateCertificate>& certs,
               bool share) {
  const int d = polys.front().dim();
  std::vector<Vector> rows;
  std::vector<double> offsets;
  std::vector<std::vector<std::pair<int, double>>> uses(polys.size());
  auto find_row = [&](const Vector& w, double b) -> int {
    if (share) {
      for (std::size_t r = 0; r < rows.size(); ++r)
        if ((rows[r] - w).cwiseAbs().maxCoeff() <= 1e-12 && std::abs(offsets[r] - b) <= 1e-12)
          return static_cast<int>(r);
    }
    rows.push_back(w);
    offsets.push_back(b);
    return static_cast<int>(rows.size()) - 1;
  };
  for (std::size_t g = 0; g < polys.size(); ++g) {
    const auto& poly = polys[g];
    for (Eigen::Index i = 0; i < poly.normals().rows(); ++i) {
      const int r = find_row(poly.normals().row(i).transpose(), poly.offsets()[i]);
      uses[g].emplace_back(r, -certs[g].M * certs[g].c[i]);
    }
  }
  const auto l = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(polys.size());
  Bank bank{{Matrix(l, d), Vector(l), Activation::Relu},
            {Matrix::Zero(k, l), Vector(k), Activation::Relu}};
  for (Eigen::Index r = 0; r < l; ++r) {
    bank.faces.weights.row(r) = rows[r].transpose();
    bank.faces.bias[r] = offsets[r];
  }
  for (Eigen::Index g = 0; g < k; ++g) {
    for (const auto& [r, w] : uses[g]) bank.gates.weights(g, r) += w;
    bank.gates.bias[g] = 1.0 + certs[g].M * certs[g].V;
  }
  return bank;
}

std::vector<GateCertificate> certify_all(const std::vector<ConvexPolytope>& polys,
                                         const std::vector<double>& eps) {
  std::vector<GateCertificate> certs;
  certs.reserve(polys.size());
  for (std::size_t i = 0; i < polys.size(); ++i) certs.push_back(polytope_gate(polys[i], eps[i]).certificate);
  return certs;
}

Construction union_of(const std::vector<ConvexPolytope>& polys, const std::vector<double>& eps) {
  if (polys.empty()) throw ConstructionError("cannot build a union over an empty cover");
  const int d = polys.front().dim();
  for (const auto& p : polys)
    if (p.dim() != d) throw DimensionError("cover members live in different dimensions");
  auto certs = certify_all(polys, eps);
  Bank bank = gate_bank(polys, certs, false);
  Network net(d, {std::move(bank.faces), std::move(bank.gates), Layer::pool()});
  return {std::move(net), std::move(certs)};
}

Construction difference_of(const std::vector<ConvexPolytope>& positives,
                           const std::vector<ConvexPolytope>& negatives, double eps, double inner,
                           bool share) {
  if (positives.empty()) throw ConstructionError("difference construction needs at least one positive");
  if (!(eps > 0.0)) throw ConstructionError("shell width must be positive");
  if (!(inner > 0.0) || inner > eps)
    throw ConstructionError("inner shell must lie in (0, eps]");
  const int d = positives.front().dim();
  std::vector<ConvexPolytope> all = positives;
  all.insert(all.end(), negatives.begin(), negatives.end());
  for (const auto& p : all)
    if (p.dim() != d) throw DimensionError("difference members live in different dimensions");
  std::vector<double> shells(positives.size(), eps);
  shells.insert(shells.end(), negatives.size(), inner);

  auto certs = certify_all(all, shells);
  Bank bank = gate_bank(all, certs, share);
  const auto np = static_cast<Eigen::Index>(positives.size());
  const auto nq = static_cast<Eigen::Index>(negatives.size());
  Layer combine{Matrix::Zero(2, np + nq), Vector::Ones(2), Activation::Relu};
  combine.weights.row(0).head(np).setConstant(-1.0);
  combine.weights.row(1).tail(nq).setConstant(-1.0);
  Matrix head_w(1, 2);
  head_w << -1.0, 1.0;
  Layer head{head_w, Vector::Zero(1), Activation::Relu};
  Network net(d, {std::move(bank.faces), std::move(bank.gates), std::move(combine), std::move(head)});
  return {std::move(net), std::move(certs)};
}

bool is_difference_head(const Layer& l) {
  return l.activation == Activation::Relu && l.weights.rows() == 1 && l.weights.cols() == 2 &&
         l.weights(0, 0) == -1.0 && l.weights(0, 1) == 1.0 && l.bias[0] == 0.0;
}

}  // namespace

Construction union_indicator(const std::vector<ConvexPolytope>& cover, double eps) {
  return union_of(cover, std::vector<double>(cover.size(), eps));
}

Construction difference_indicator(const DifferencePlan& plan, double eps) {
  return difference_of(plan.positives, plan.negatives, eps, plan.inner_shell.value_or(eps / 10.0), false);
}

Construction complex_indicator(const SimplicialComplex& complex, double eps) {
  if (!(eps > 0.0)) throw ConstructionError("shell width must be positive");
  std::vector<ConvexPolytope> covers;
  for (const auto& facet : complex.facets()) covers.push_back(facet_hyperplanes(simplex_cover(facet, eps)));
  return union_of(covers, std::vector<double>(covers.size(), eps / 2.0));
}

Construction cuboid_hole_indicator(const CuboidHoleSpace& space, double eps,
                                   std::optional<double> inner_shell) {
  std::vector<ConvexPolytope> holes;
  for (const auto& h : space.holes()) holes.push_back(ConvexPolytope::box(h));
  return difference_of({ConvexPolytope::box(space.outer())}, holes, eps, inner_shell.value_or(eps / 10.0),
                       true);
}

Construction build_indicator(const Space& space, double eps, std::optional<double> inner_shell) {
  if (const auto* p = std::get_if<ConvexPolytope>(&space)) return union_indicator({*p}, eps);
  if (const auto* u = std::get_if<PolytopeUnion>(&space)) return union_indicator(u->members, eps);
  if (const auto* d = std::get_if<DifferenceSet>(&space))
    return difference_indicator({d->positives, d->negatives, inner_shell}, eps);
  if (const auto* k = std::get_if<SimplicialComplex>(&space)) return complex_indicator(*k, eps);
  return cuboid_hole_indicator(std::get<CuboidHoleSpace>(space), eps, inner_shell);
}

Network maxpool_to_relu(const Network& net) {
  if (net.layers().empty() || !net.layers().back().is_pool())
    throw ConstructionError("maxpool rewrite needs a network ending in MAXPOOL");
  std::vector<Layer> layers(net.layers().begin(), net.layers().end() - 1);
  const Eigen::Index k = layers.empty() ? net.input_dim() : layers.back().out_dim();
  layers.push_back({Matrix::Constant(1, k, -1.0), Vector::Ones(1), Activation::Relu});
  layers.push_back({Matrix::Constant(1, 1, -1.0), Vector::Ones(1), Activation::Identity});
  return Network(net.input_dim(), std::move(layers));
}

double sigmoid_head_slope(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ConstructionError("sigmoid head needs delta in (0, 1/2)");
  return 1.01 * 2.0 * std::log((1.0 - delta) / delta);
}

Network sigmoid_head(const Network& net, double delta) {
  const double M = sigmoid_head_slope(delta);
  if (net.layers().empty()) throw ConstructionError("sigmoid head: network has no layers");
  std::vector<Layer> layers(net.layers().begin(), net.layers().end() - 1);
  const Layer& last = net.layers().back();
  if (last.is_pool()) {
    const Eigen::Index k = layers.empty() ? net.input_dim() : layers.back().out_dim();
    layers.push_back({Matrix::Constant(1, k, M), Vector::Constant(1, -0.5 * M), Activation::Sigmoid});
  } else if (is_difference_head(last)) {
    layers.push_back({Matrix(M * last.weights), Vector::Constant(1, -0.5 * M), Activation::Sigmoid});
  } else {
    throw ConstructionError("sigmoid head: final layer is neither MAXPOOL nor a relu(b - a) head");
  }
  return Network(net.input_dim(), std::move(layers));
}

std::string certificates_to_json(const std::vector<GateCertificate>& certs) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& c : certs) {
    gates.push_back({{"c", std::vector<double>(c.c.data(), c.c.data() + c.c.size())},
                     {"V", c.V},
                     {"m_hat", c.m_hat},
                     {"M", c.M},
                     {"eps", c.eps},
                     {"method", to_string(c.method)}});
  }
  return nlohmann::json{{"gates", gates}}.dump(2) + "\n";
}

}  // namespace polynet
