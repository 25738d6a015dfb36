#include "dirbv/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dirbv {

namespace {
constexpr double kSlack = 1e-12;
}

Covering max_separated_covering(const MetricMeasureSpace& space, double epsilon) {
  if (!(epsilon >= space.mesh_scale() * (1.0 - kSlack))) {
    throw DomainError("max_separated_covering: epsilon below the mesh scale degenerates to all vertices");
  }
  const std::size_t n = space.size();
  Covering cov;
  cov.epsilon = epsilon;
  const double admit = epsilon * (1.0 - kSlack);
  for (std::size_t x = 0; x < n; ++x) {
    bool far = true;
    for (std::size_t c : cov.centers) {
      if (space.distance(x, c) < admit) {
        far = false;
        break;
      }
    }
    if (far) cov.centers.push_back(x);
  }
  cov.memberOf = members_at_dilation(space, cov, 1.0);
  return cov;
}

std::vector<std::vector<std::size_t>> members_at_dilation(const MetricMeasureSpace& space, const Covering& cov,
                                                          double dilation) {
  const std::size_t n = space.size();
  std::vector<std::vector<std::size_t>> members(n);
  const double lim = dilation * cov.epsilon * (1.0 + kSlack);
  Vec row(n);
  for (std::size_t i = 0; i < cov.centers.size(); ++i) {
    space.distance_row(cov.centers[i], row);
    for (std::size_t x = 0; x < n; ++x)
      if (row[x] <= lim) members[x].push_back(i);
  }
  return members;
}

std::size_t overlap_multiplicity(const MetricMeasureSpace& space, const Covering& cov, double dilation) {
  std::size_t k = 0;
  for (const auto& m : members_at_dilation(space, cov, dilation)) k = std::max(k, m.size());
  return k;
}

CoveringCheck check_covering(const MetricMeasureSpace& space, const Covering& cov) {
  CoveringCheck chk;
  chk.minCenterDistance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cov.centers.size(); ++i)
    for (std::size_t j = i + 1; j < cov.centers.size(); ++j)
      chk.minCenterDistance = std::min(chk.minCenterDistance, space.distance(cov.centers[i], cov.centers[j]));
  chk.separated = chk.minCenterDistance >= cov.epsilon * (1.0 - kSlack);
  for (std::size_t x = 0; x < space.size(); ++x) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c : cov.centers) nearest = std::min(nearest, space.distance(x, c));
    if (nearest > cov.epsilon * (1.0 + kSlack)) chk.covers = false;
    const bool isCenter = std::find(cov.centers.begin(), cov.centers.end(), x) != cov.centers.end();
    if (!isCenter && nearest >= cov.epsilon * (1.0 - kSlack)) chk.maximal = false;
  }
  return chk;
}

PartitionOfUnity partition_of_unity(const MetricMeasureSpace& space, const Covering& cov) {
  const std::size_t n = space.size();
  PartitionOfUnity pou;
  pou.covering = cov;
  pou.weights.assign(n, {});
  const double support = 2.0 * cov.epsilon;
  Vec row(n);
  for (std::size_t i = 0; i < cov.centers.size(); ++i) {
    space.distance_row(cov.centers[i], row);
    for (std::size_t x = 0; x < n; ++x) {
      const double psi = 1.0 - row[x] / support;
      if (psi > 0.0) pou.weights[x].emplace_back(i, psi);
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (const auto& [i, w] : pou.weights[x]) total += w;
    if (!(total > 0.0)) {
      throw InvariantViolation("partition_of_unity: vertex " + std::to_string(x) + " is outside every bump");
    }
    for (auto& entry : pou.weights[x]) entry.second /= total;
  }

  // Lipschitz constant across graph edges, per center slot.
  Vec phiX(cov.centers.size(), 0.0), phiY(cov.centers.size(), 0.0);
  double lip = 0.0;
  for (const Edge& e : space.edges()) {
    for (const auto& [i, w] : pou.weights[e.i]) phiX[i] = w;
    for (const auto& [i, w] : pou.weights[e.j]) phiY[i] = w;
    const double d = space.distance(e.i, e.j);
    auto visit = [&](std::size_t i) { lip = std::max(lip, std::abs(phiX[i] - phiY[i]) / d); };
    for (const auto& entry : pou.weights[e.i]) visit(entry.first);
    for (const auto& entry : pou.weights[e.j]) visit(entry.first);
    for (const auto& entry : pou.weights[e.i]) phiX[entry.first] = 0.0;
    for (const auto& entry : pou.weights[e.j]) phiY[entry.first] = 0.0;
  }
  pou.lipBound = lip * cov.epsilon;
  return pou;
}

Vec ball_averages(const MetricMeasureSpace& space, const Covering& cov, std::span<const double> f) {
  const std::size_t k = cov.centers.size();
  Vec sum(k, 0.0), mass(k, 0.0);
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (std::size_t i : cov.memberOf[x]) {
      sum[i] += f[x] * space.measure(x);
      mass[i] += space.measure(x);
    }
  }
  for (std::size_t i = 0; i < k; ++i) sum[i] /= mass[i];
  return sum;
}

Vec discrete_convolution(const MetricMeasureSpace& space, const PartitionOfUnity& pou, std::span<const double> f) {
  if (f.size() != space.size()) throw DomainError("discrete_convolution: function length does not match space");
  const Vec avg = ball_averages(space, pou.covering, f);
  Vec u(space.size(), 0.0);
  for (std::size_t x = 0; x < space.size(); ++x)
    for (const auto& [i, w] : pou.weights[x]) u[x] += w * avg[i];
  return u;
}

RelaxationEnergy relaxation_energy(const MetricMeasureSpace& space, std::span<const double> f,
                                   std::span<const double> epsilons, double p, bool checkRange) {
  if (p < 1.0) throw DomainError("relaxation_energy: p must be >= 1");
  if (epsilons.empty()) throw DomainError("relaxation_energy: empty epsilon list");
  if (checkRange) require_within(resolved_radius_range(space), epsilons, "relaxation_energy");
  RelaxationEnergy out;
  out.epsilons.assign(epsilons.begin(), epsilons.end());
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    const PartitionOfUnity pou = partition_of_unity(space, max_separated_covering(space, epsilons[k]));
    const Vec u = discrete_convolution(space, pou, f);
    const Vec g = carre_du_champ(space, u);
    double e = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) e += std::pow(g[x], p) * space.measure(x);
    out.energies.push_back(e);
    if (k == 0 || e > out.sup) {
      out.sup = e;
      out.argmax = k;
    }
  }
  return out;
}

}  // namespace dirbv
