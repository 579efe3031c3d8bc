#include <cmath>
#include <numeric>

#include "polynet/constructor.hpp"

namespace polynet {

WidthBound simplicial_width_bound(int d, const DimensionHistogram& hist) {
  if (d < 1) throw DimensionError("ambient dimension must be positive");
  hist.validate();
  const double half = d / 2.0;
  const long k = hist.total();

  long low = 0;
  for (int j = 0; j < static_cast<int>(hist.counts.size()); ++j)
    if (j < half) low += hist.count(j);

  double inner = 0.0;
  for (int j = 0; j < static_cast<int>(hist.counts.size()); ++j) {
    const int kj = hist.count(j);
    if (kj == 0) continue;
    if (j <= half)
      inner += kj * (j + 2.0) / (d - j) + (j + 2.0) / (j + 1.0);
    else
      inner += kj;
  }

  WidthBound out;
  out.packing_term = static_cast<double>(k * (d + 1) - static_cast<long>(d - 1) * (low / 2));
  out.covering_term = (d + 1) * inner;
  out.bound = static_cast<long>(std::floor(std::min(out.packing_term, out.covering_term)));
  if (d == 2 && hist.count(1) > 0) {
    const long edges = hist.count(1);
    out.polygon_example_value = 3 * edges - edges / 2;
  }
  return out;
}

Architecture betti_architecture(int d, const BettiProfile& betti) {
  betti.validate();
  if (betti.dim() != d) throw DimensionError("Betti profile length must be d + 1");
  long weighted = 0;
  long total = 0;
  for (int k = 0; k <= d; ++k) {
    weighted += static_cast<long>(k + 1) * betti.betti[k];
    total += betti.betti[k];
  }
  Architecture arch;
  arch.widths = {d, static_cast<int>(2 * (d - 1 + weighted)), static_cast<int>(total), 2, 1};
  arch.activations.assign(4, Activation::Relu);
  return arch;
}

}  // namespace polynet
