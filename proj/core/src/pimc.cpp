#include "cyclelab/pimc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cyclelab/io.hpp"

namespace cyclelab::pimc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogTwoPi = 1.8378770664093454836;

double wrap_cell(double u, double box, long& image) {
  double k = std::floor(u / box);
  image = static_cast<long>(k);
  return u - k * box;
}

double gaussian_logpdf(double x, double mean, double sigma) {
  double d = x - mean;
  return -0.5 * d * d / (sigma * sigma) - 0.5 * kLogTwoPi - std::log(sigma);
}

// Step and midpoint scales of the discretized strand. A full strand spans
// one unit of the duration that lambda_duration encodes, split into M steps.
double step_sigma(double lambda, int slices) {
  return lambda * std::sqrt(1.0 / (2.0 * kPi * slices));
}

double midpoint_sigma(double lambda, int slices, int gap) {
  return lambda * std::sqrt(gap / (8.0 * kPi * slices));
}

// Unreduced displacement of step m along strand i.
void step_delta(const WorldLines& state, int i, int m, double* out) {
  const double* a = state.bead(i, m);
  const double* b = state.bead(i, m + 1);
  const int* l = state.link(i, m);
  for (int j = 0; j < state.dim; ++j)
    out[j] = b[j] - a[j] + state.box * l[j];
}

struct StrandBackup {
  std::vector<double> beads;
  std::vector<int> links;
};

StrandBackup backup_strand(const WorldLines& state, int i) {
  StrandBackup b;
  long bead_count = static_cast<long>(state.slices + 1) * state.dim;
  long link_count = static_cast<long>(state.slices) * state.dim;
  b.beads.assign(state.bead(i, 0), state.bead(i, 0) + bead_count);
  b.links.assign(state.link(i, 0), state.link(i, 0) + link_count);
  return b;
}

void restore_strand(WorldLines& state, int i, const StrandBackup& b) {
  std::copy(b.beads.begin(), b.beads.end(), state.bead(i, 0));
  std::copy(b.links.begin(), b.links.end(), state.link(i, 0));
}

// Install a freshly drawn bridge as strand i. path is unreduced; the stored
// endpoint slice is forced to the successor's start y and the final link
// closes the winding bookkeeping exactly.
void install_strand(WorldLines& state, int i, const BridgeDraw& draw,
                    std::span<const double> y) {
  int m_slices = state.slices;
  int dim = state.dim;
  std::vector<long> prev_image(dim, 0), image(dim);
  for (int m = 1; m < m_slices; ++m) {
    double* w = state.bead(i, m);
    for (int j = 0; j < dim; ++j)
      w[j] = wrap_cell(draw.path[static_cast<long>(m) * dim + j], state.box,
                       image[j]);
    int* l = state.link(i, m - 1);
    for (int j = 0; j < dim; ++j) l[j] = static_cast<int>(image[j] - prev_image[j]);
    prev_image = image;
  }
  double* end = state.bead(i, m_slices);
  int* last = state.link(i, m_slices - 1);
  for (int j = 0; j < dim; ++j) {
    end[j] = y[j];
    last[j] = static_cast<int>(draw.winding[j] - prev_image[j]);
  }
}

// Reconstruct strand i as an unreduced path anchored at its stored start.
std::vector<double> unreduced_strand(const WorldLines& state, int i) {
  int dim = state.dim;
  std::vector<double> path(static_cast<long>(state.slices + 1) * dim);
  std::vector<double> delta(dim);
  for (int j = 0; j < dim; ++j) path[j] = state.bead(i, 0)[j];
  for (int m = 0; m < state.slices; ++m) {
    step_delta(state, i, m, delta.data());
    for (int j = 0; j < dim; ++j)
      path[static_cast<long>(m + 1) * dim + j] =
          path[static_cast<long>(m) * dim + j] + delta[j];
  }
  return path;
}

double pair_energy(const kernels::PotentialSpec& u,
                   std::span<const double> displacement, double box,
                   double cap) {
  double v = kernels::periodize_potential(u, displacement, box);
  return std::min(v, cap);
}

bool members_of_cycle(const WorldLines& state, int start, int probe) {
  int cur = state.perm[start];
  while (cur != start) {
    if (cur == probe) return true;
    cur = state.perm[cur];
  }
  return probe == start;
}

std::vector<int> collect_cycle(const WorldLines& state, int start) {
  std::vector<int> members{start};
  int cur = state.perm[start];
  while (cur != start) {
    members.push_back(cur);
    cur = state.perm[cur];
  }
  return members;
}

// Rigid shift of one strand with exact rewrap bookkeeping. Beads move by
// delta; link offsets absorb the change of image indices so every step
// displacement is preserved bit for bit.
void shift_strand(WorldLines& state, int i, std::span<const double> delta) {
  int dim = state.dim;
  std::vector<long> prev(dim), cur(dim);
  for (int m = 0; m <= state.slices; ++m) {
    double* w = state.bead(i, m);
    for (int j = 0; j < dim; ++j)
      w[j] = wrap_cell(w[j] + delta[j], state.box, cur[j]);
    if (m > 0) {
      int* l = state.link(i, m - 1);
      for (int j = 0; j < dim; ++j) l[j] += static_cast<int>(cur[j] - prev[j]);
    }
    prev = cur;
  }
}

}  // namespace

void PimcConfig::validate() const {
  system.validate();
  if (system.dim < 1 || system.dim > 4)
    throw std::invalid_argument("pimc supports dim 1..4");
  if (n_particles < 1) throw std::invalid_argument("need at least 1 particle");
  if (slices < 2 || (slices & (slices - 1)) != 0)
    throw std::invalid_argument("slices must be a power of two, >= 2");
  if (potential.kind == kernels::PotentialSpec::Kind::lattice_nn)
    throw std::invalid_argument("lattice potential has no continuum paths");
  if (sweeps < 10) throw std::invalid_argument("too few sweeps");
  if (!(equilibration_fraction >= 0.0 && equilibration_fraction < 0.95))
    throw std::invalid_argument("equilibration fraction out of range");
  if (batches < 2) throw std::invalid_argument("need at least 2 batches");
  if (measure_every < 1) throw std::invalid_argument("measure_every >= 1");
  if (winding_shells < 1) throw std::invalid_argument("winding_shells >= 1");
  if (!(action_cap > 0.0)) throw std::invalid_argument("action cap must be > 0");
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * kPi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::uniform_index(int n) {
  int k = static_cast<int>(uniform() * n);
  return k >= n ? n - 1 : k;
}

int WorldLines::cycle_length(int start) const {
  int len = 1;
  int cur = perm[start];
  while (cur != start) {
    cur = perm[cur];
    ++len;
  }
  return len;
}

bool WorldLines::continuity_ok() const {
  for (int i = 0; i < n_particles; ++i) {
    const double* end = bead(i, slices);
    const double* succ = bead(perm[i], 0);
    for (int j = 0; j < dim; ++j)
      if (end[j] != succ[j]) return false;
  }
  return true;
}

std::vector<int> WorldLines::strand_winding(int i) const {
  std::vector<int> total(dim, 0);
  for (int m = 0; m < slices; ++m) {
    const int* l = link(i, m);
    for (int j = 0; j < dim; ++j) total[j] += l[j];
  }
  return total;
}

WorldLines initial_state(const PimcConfig& cfg) {
  cfg.validate();
  WorldLines state;
  state.n_particles = cfg.n_particles;
  state.dim = cfg.system.dim;
  state.slices = cfg.slices;
  state.box = cfg.system.box;
  state.perm.resize(cfg.n_particles);
  for (int i = 0; i < cfg.n_particles; ++i) state.perm[i] = i;
  state.beads.assign(
      static_cast<long>(cfg.n_particles) * (cfg.slices + 1) * state.dim, 0.0);
  state.links.assign(
      static_cast<long>(cfg.n_particles) * cfg.slices * state.dim, 0);

  int side = 1;
  while (std::pow(side, state.dim) < cfg.n_particles) ++side;
  double spacing = state.box / side;
  for (int i = 0; i < cfg.n_particles; ++i) {
    int rest = i;
    for (int j = 0; j < state.dim; ++j) {
      double coord = (rest % side + 0.5) * spacing;
      rest /= side;
      for (int m = 0; m <= cfg.slices; ++m) state.bead(i, m)[j] = coord;
    }
  }
  return state;
}

BridgeDraw sample_bridge(std::span<const double> x, std::span<const double> y,
                         double lambda_duration, double box, int slices,
                         int shells, Rng& rng) {
  int dim = static_cast<int>(x.size());
  BridgeDraw draw;
  draw.winding.resize(dim);
  draw.path.resize(static_cast<long>(slices + 1) * dim);
  double lambda_sq = lambda_duration * lambda_duration;

  for (int j = 0; j < dim; ++j) {
    double base = y[j] - x[j];
    double total = 0.0;
    for (int z = -shells; z <= shells; ++z) {
      double r = base + box * z;
      total += std::exp(-kPi * r * r / lambda_sq);
    }
    double target = rng.uniform() * total;
    double running = 0.0;
    int picked = shells;  // FP ties fall through to the last shell
    for (int z = -shells; z <= shells; ++z) {
      double r = base + box * z;
      running += std::exp(-kPi * r * r / lambda_sq);
      if (running >= target) {
        picked = z;
        break;
      }
    }
    double r_picked = base + box * picked;
    draw.winding[j] = picked;
    draw.log_density +=
        -kPi * r_picked * r_picked / lambda_sq - std::log(total);
    draw.path[j] = x[j];
    draw.path[static_cast<long>(slices) * dim + j] = y[j] + box * picked;
  }

  for (int gap = slices; gap >= 2; gap /= 2) {
    for (int a = 0; a < slices; a += gap) {
      int b = a + gap;
      int mid = a + gap / 2;
      double sigma = midpoint_sigma(lambda_duration, slices, gap);
      for (int j = 0; j < dim; ++j) {
        double mean = 0.5 * (draw.path[static_cast<long>(a) * dim + j] +
                             draw.path[static_cast<long>(b) * dim + j]);
        double value = mean + sigma * rng.normal();
        draw.path[static_cast<long>(mid) * dim + j] = value;
        draw.log_density += gaussian_logpdf(value, mean, sigma);
      }
    }
  }
  return draw;
}

double bridge_log_density(std::span<const double> path,
                          std::span<const double> y, double lambda_duration,
                          double box, int slices, int shells) {
  int dim = static_cast<int>(y.size());
  double lambda_sq = lambda_duration * lambda_duration;
  double log_density = 0.0;
  for (int j = 0; j < dim; ++j) {
    double base = y[j] - path[j];
    double total = 0.0;
    for (int z = -shells; z <= shells; ++z) {
      double r = base + box * z;
      total += std::exp(-kPi * r * r / lambda_sq);
    }
    double endpoint = path[static_cast<long>(slices) * dim + j];
    double z_real = (endpoint - y[j]) / box;
    int z = static_cast<int>(std::lround(z_real));
    if (std::abs(z) > shells)
      throw std::domain_error("path winding outside the sampling window");
    double r = base + box * z;
    log_density +=
        -kPi * r * r / lambda_sq - std::log(total);
  }
  for (int gap = slices; gap >= 2; gap /= 2) {
    for (int a = 0; a < slices; a += gap) {
      int b = a + gap;
      int mid = a + gap / 2;
      double sigma = midpoint_sigma(lambda_duration, slices, gap);
      for (int j = 0; j < dim; ++j) {
        double mean = 0.5 * (path[static_cast<long>(a) * dim + j] +
                             path[static_cast<long>(b) * dim + j]);
        log_density += gaussian_logpdf(
            path[static_cast<long>(mid) * dim + j], mean, sigma);
      }
    }
  }
  return log_density;
}

double kernel_log_weight(std::span<const double> delta, double lambda,
                         double box, int shells) {
  double lambda_sq = lambda * lambda;
  double total_log = 0.0;
  for (double dj : delta) {
    double peak = -std::numeric_limits<double>::infinity();
    for (int z = -shells; z <= shells; ++z) {
      double r = dj + box * z;
      peak = std::max(peak, -kPi * r * r / lambda_sq);
    }
    double sum = 0.0;
    for (int z = -shells; z <= shells; ++z) {
      double r = dj + box * z;
      sum += std::exp(-kPi * r * r / lambda_sq - peak);
    }
    total_log += peak + std::log(sum);
  }
  return total_log;
}

double winding_truncation_ratio(double box_over_lambda, int shells) {
  // Worst case is a displacement at half a cell: compare the shell-limited
  // mass against a sum wide enough to be exhaustive in doubles.
  double narrow = 0.0, wide = 0.0;
  for (int z = -shells - 40; z <= shells + 40; ++z) {
    double r = (0.5 + z) * box_over_lambda;
    double w = std::exp(-kPi * r * r);
    wide += w;
    if (std::abs(z) <= shells) narrow += w;
  }
  return (wide - narrow) / wide;
}

double action(const WorldLines& state, const PimcConfig& cfg) {
  if (cfg.potential.kind == kernels::PotentialSpec::Kind::zero) return 0.0;
  int dim = state.dim;
  std::vector<double> displacement(dim);
  double total = 0.0;
  for (int s = 0; s < state.slices; ++s) {
    for (int i = 0; i < state.n_particles; ++i) {
      const double* xi = state.bead(i, s);
      for (int k = i + 1; k < state.n_particles; ++k) {
        const double* xk = state.bead(k, s);
        for (int j = 0; j < dim; ++j) displacement[j] = xi[j] - xk[j];
        try {
          total += pair_energy(cfg.potential, displacement, state.box,
                               cfg.action_cap);
        } catch (const std::domain_error&) {
          return std::numeric_limits<double>::infinity();
        }
      }
    }
  }
  return cfg.system.beta * total / state.slices;
}

double log_free_weight(const WorldLines& state, const PimcConfig& cfg) {
  double sigma = step_sigma(cfg.system.lambda, state.slices);
  std::vector<double> delta(state.dim);
  double total = 0.0;
  for (int i = 0; i < state.n_particles; ++i)
    for (int m = 0; m < state.slices; ++m) {
      step_delta(state, i, m, delta.data());
      for (int j = 0; j < state.dim; ++j)
        total += gaussian_logpdf(delta[j], 0.0, sigma);
    }
  return total;
}

bool move_swap(WorldLines& state, const PimcConfig& cfg, Rng& rng,
               MoveStats& merge_stats, MoveStats& split_stats) {
  if (state.n_particles < 2) return false;
  int i = rng.uniform_index(state.n_particles);
  int j = rng.uniform_index(state.n_particles - 1);
  if (j >= i) ++j;

  bool splits = members_of_cycle(state, i, j);
  MoveStats& stats = splits ? split_stats : merge_stats;
  ++stats.proposed;

  int dim = state.dim;
  int ti = state.perm[i];
  int tj = state.perm[j];
  double lambda = cfg.system.lambda;
  bool interacting =
      cfg.potential.kind != kernels::PotentialSpec::Kind::zero;
  double action_old = interacting ? action(state, cfg) : 0.0;

  std::vector<double> d_old_i(dim), d_old_j(dim), d_new_i(dim), d_new_j(dim);
  for (int c = 0; c < dim; ++c) {
    d_old_i[c] = state.bead(ti, 0)[c] - state.bead(i, 0)[c];
    d_old_j[c] = state.bead(tj, 0)[c] - state.bead(j, 0)[c];
    d_new_i[c] = state.bead(tj, 0)[c] - state.bead(i, 0)[c];
    d_new_j[c] = state.bead(ti, 0)[c] - state.bead(j, 0)[c];
  }
  double log_kernel_ratio =
      kernel_log_weight(d_new_i, lambda, state.box, cfg.winding_shells) +
      kernel_log_weight(d_new_j, lambda, state.box, cfg.winding_shells) -
      kernel_log_weight(d_old_i, lambda, state.box, cfg.winding_shells) -
      kernel_log_weight(d_old_j, lambda, state.box, cfg.winding_shells);

  StrandBackup backup_i = backup_strand(state, i);
  StrandBackup backup_j = backup_strand(state, j);

  std::span<const double> yi(state.bead(tj, 0), dim);
  std::span<const double> yj(state.bead(ti, 0), dim);
  BridgeDraw draw_i =
      sample_bridge(std::span<const double>(state.bead(i, 0), dim), yi,
                    lambda, state.box, state.slices, cfg.winding_shells, rng);
  BridgeDraw draw_j =
      sample_bridge(std::span<const double>(state.bead(j, 0), dim), yj,
                    lambda, state.box, state.slices, cfg.winding_shells, rng);
  state.perm[i] = tj;
  state.perm[j] = ti;
  install_strand(state, i, draw_i, yi);
  install_strand(state, j, draw_j, yj);

  double log_ratio = log_kernel_ratio;
  if (interacting) log_ratio -= action(state, cfg) - action_old;

  if (std::log(std::max(rng.uniform(), 1e-300)) < log_ratio) {
    ++stats.accepted;
    return true;
  }
  state.perm[i] = ti;
  state.perm[j] = tj;
  restore_strand(state, i, backup_i);
  restore_strand(state, j, backup_j);
  return false;
}

bool move_redraw(WorldLines& state, const PimcConfig& cfg, Rng& rng,
                 MoveStats& stats) {
  ++stats.proposed;
  int i = rng.uniform_index(state.n_particles);
  int dim = state.dim;
  bool interacting =
      cfg.potential.kind != kernels::PotentialSpec::Kind::zero;
  double action_old = interacting ? action(state, cfg) : 0.0;
  StrandBackup backup = backup_strand(state, i);
  std::span<const double> y(state.bead(state.perm[i], 0), dim);
  BridgeDraw draw =
      sample_bridge(std::span<const double>(state.bead(i, 0), dim), y,
                    cfg.system.lambda, state.box, state.slices,
                    cfg.winding_shells, rng);
  install_strand(state, i, draw, y);
  if (!interacting) {
    ++stats.accepted;
    return true;
  }
  double log_ratio = -(action(state, cfg) - action_old);
  if (std::log(std::max(rng.uniform(), 1e-300)) < log_ratio) {
    ++stats.accepted;
    return true;
  }
  restore_strand(state, i, backup);
  return false;
}

bool move_translate(WorldLines& state, const PimcConfig& cfg, Rng& rng,
                    MoveStats& stats) {
  ++stats.proposed;
  int seed_particle = rng.uniform_index(state.n_particles);
  std::vector<int> cycle = collect_cycle(state, seed_particle);
  std::vector<double> delta(state.dim);
  for (int j = 0; j < state.dim; ++j)
    delta[j] = (rng.uniform() - 0.5) * state.box;

  bool interacting =
      cfg.potential.kind != kernels::PotentialSpec::Kind::zero;
  if (!interacting) {
    for (int member : cycle) shift_strand(state, member, delta);
    ++stats.accepted;
    return true;
  }
  double action_old = action(state, cfg);
  std::vector<StrandBackup> backups;
  backups.reserve(cycle.size());
  for (int member : cycle) backups.push_back(backup_strand(state, member));
  for (int member : cycle) shift_strand(state, member, delta);
  double log_ratio = -(action(state, cfg) - action_old);
  if (std::log(std::max(rng.uniform(), 1e-300)) < log_ratio) {
    ++stats.accepted;
    return true;
  }
  for (std::size_t k = 0; k < cycle.size(); ++k)
    restore_strand(state, cycle[k], backups[k]);
  return false;
}

long RunStats::total_draws() const {
  long total = 0;
  for (long c : histogram) total += c;
  return total;
}

PimcResult estimate_cycles(const PimcConfig& cfg) {
  return estimate_cycles(cfg, initial_state(cfg));
}

PimcResult estimate_cycles(const PimcConfig& cfg, WorldLines start) {
  cfg.validate();
  if (start.n_particles != cfg.n_particles || start.slices != cfg.slices ||
      start.dim != cfg.system.dim || !start.continuity_ok())
    throw std::invalid_argument(
        "starting state does not match the run configuration");
  WorldLines state = std::move(start);
  Rng rng(cfg.seed);

  long equil = static_cast<long>(cfg.equilibration_fraction * cfg.sweeps);
  long raw_measurements =
      cfg.sweeps > equil ? (cfg.sweeps - equil - 1) / cfg.measure_every + 1
                         : 0;
  long batch_size = raw_measurements / cfg.batches;
  if (batch_size < 1)
    throw std::invalid_argument("too few measurements for the batch count");
  long planned = batch_size * cfg.batches;

  RunStats stats;
  stats.seed = cfg.seed;
  stats.action_cap = cfg.action_cap;
  stats.histogram.assign(cfg.n_particles, 0);
  std::vector<std::vector<long>> batch_hist(
      cfg.batches, std::vector<long>(cfg.n_particles, 0));
  std::vector<double> batch_action(cfg.batches, 0.0);

  long measured = 0;
  for (long sweep = 0; sweep < cfg.sweeps && measured < planned; ++sweep) {
    for (int k = 0; k < cfg.n_particles; ++k)
      move_swap(state, cfg, rng, stats.swap_merge, stats.swap_split);
    for (int k = 0; k < cfg.n_particles; ++k)
      move_redraw(state, cfg, rng, stats.redraw);
    move_translate(state, cfg, rng, stats.translate);

    if (sweep < equil || (sweep - equil) % cfg.measure_every != 0) continue;
    long batch = measured / batch_size;
    for (int i = 0; i < cfg.n_particles; ++i) {
      int len = state.cycle_length(i);
      ++stats.histogram[len - 1];
      ++batch_hist[batch][len - 1];
    }
    batch_action[batch] += action(state, cfg);
    ++measured;
  }
  stats.measurements = measured;

  double total = static_cast<double>(measured) * cfg.n_particles;
  stats.probability.resize(cfg.n_particles);
  stats.std_error.resize(cfg.n_particles);
  for (int n = 0; n < cfg.n_particles; ++n)
    stats.probability[n] = stats.histogram[n] / total;
  double per_batch = static_cast<double>(batch_size) * cfg.n_particles;
  for (int n = 0; n < cfg.n_particles; ++n) {
    double mean = 0.0;
    for (int b = 0; b < cfg.batches; ++b) mean += batch_hist[b][n] / per_batch;
    mean /= cfg.batches;
    double var = 0.0;
    for (int b = 0; b < cfg.batches; ++b) {
      double dev = batch_hist[b][n] / per_batch - mean;
      var += dev * dev;
    }
    stats.std_error[n] =
        std::sqrt(var / (static_cast<double>(cfg.batches) *
                         (cfg.batches - 1)));
  }
  stats.action_batch_means.resize(cfg.batches);
  double action_mean = 0.0;
  for (int b = 0; b < cfg.batches; ++b) {
    stats.action_batch_means[b] = batch_action[b] / batch_size;
    action_mean += stats.action_batch_means[b];
  }
  stats.mean_action = action_mean / cfg.batches;

  PimcResult result;
  result.distribution.provenance =
      idealgas::CycleDistribution::Provenance::sampled;
  result.distribution.mass = stats.probability;
  result.distribution.std_error = stats.std_error;
  result.stats = std::move(stats);
  result.final_state = std::move(state);
  return result;
}

RunStats merge_stats(const RunStats& a, const RunStats& b) {
  if (a.histogram.size() != b.histogram.size())
    throw std::invalid_argument("merging stats of different sizes");
  RunStats merged;
  merged.measurements = a.measurements + b.measurements;
  merged.histogram.resize(a.histogram.size());
  merged.probability.resize(a.histogram.size());
  merged.std_error.resize(a.histogram.size());
  double wa = static_cast<double>(a.measurements);
  double wb = static_cast<double>(b.measurements);
  double wt = wa + wb;
  for (std::size_t n = 0; n < a.histogram.size(); ++n) {
    merged.histogram[n] = a.histogram[n] + b.histogram[n];
    merged.probability[n] =
        (wa * a.probability[n] + wb * b.probability[n]) / wt;
    double sa = wa * a.std_error[n], sb = wb * b.std_error[n];
    merged.std_error[n] = std::sqrt(sa * sa + sb * sb) / wt;
  }
  auto add = [](MoveStats x, MoveStats y) {
    return MoveStats{x.proposed + y.proposed, x.accepted + y.accepted};
  };
  merged.swap_merge = add(a.swap_merge, b.swap_merge);
  merged.swap_split = add(a.swap_split, b.swap_split);
  merged.redraw = add(a.redraw, b.redraw);
  merged.translate = add(a.translate, b.translate);
  merged.action_batch_means = a.action_batch_means;
  merged.action_batch_means.insert(merged.action_batch_means.end(),
                                   b.action_batch_means.begin(),
                                   b.action_batch_means.end());
  std::sort(merged.action_batch_means.begin(),
            merged.action_batch_means.end());
  merged.mean_action = (wa * a.mean_action + wb * b.mean_action) / wt;
  merged.seed = 0;  // pooled chains have no single seed
  merged.action_cap = a.action_cap;
  return merged;
}

MuRatioEstimate estimate_mu_ratio(const PimcResult& result,
                                  const PimcConfig& cfg) {
  MuRatioEstimate est;
  if (result.stats.histogram.empty() || result.stats.histogram[0] == 0)
    return est;  // unavailable: no single-particle cycles observed
  double q1 = kernels::q_cycle(1, cfg.system);
  est.value = cfg.n_particles * result.stats.probability[0] / q1;
  est.std_error = cfg.n_particles * result.stats.std_error[0] / q1;
  est.available = true;
  return est;
}

WorldLines relabel(const WorldLines& state, std::span<const int> sigma) {
  if (static_cast<int>(sigma.size()) != state.n_particles)
    throw std::invalid_argument("relabeling size mismatch");
  WorldLines out = state;
  long bead_count = static_cast<long>(state.slices + 1) * state.dim;
  long link_count = static_cast<long>(state.slices) * state.dim;
  for (int i = 0; i < state.n_particles; ++i) {
    out.perm[sigma[i]] = sigma[state.perm[i]];
    std::copy(state.bead(i, 0), state.bead(i, 0) + bead_count,
              out.bead(sigma[i], 0));
    std::copy(state.link(i, 0), state.link(i, 0) + link_count,
              out.link(sigma[i], 0));
  }
  return out;
}

namespace {

template <typename T>
void append_raw(std::string& buffer, const T* data, std::size_t count) {
  buffer.append(reinterpret_cast<const char*>(data), count * sizeof(T));
}

template <typename T>
void read_raw(const std::string& buffer, std::size_t& offset, T* data,
              std::size_t count) {
  std::size_t bytes = count * sizeof(T);
  if (offset + bytes > buffer.size())
    throw std::runtime_error("checkpoint truncated");
  std::memcpy(data, buffer.data() + offset, bytes);
  offset += bytes;
}

constexpr char kCheckpointMagic[8] = {'C', 'L', 'W', 'B', '0', '0', '0', '1'};

}  // namespace

void save_worldlines(const WorldLines& state, const std::string& path,
                     const std::string& config_digest) {
  std::string buffer;
  buffer.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  std::uint64_t digest_len = config_digest.size();
  append_raw(buffer, &digest_len, 1);
  buffer.append(config_digest);
  std::int32_t header[3] = {state.n_particles, state.dim, state.slices};
  append_raw(buffer, header, 3);
  append_raw(buffer, &state.box, 1);
  append_raw(buffer, state.perm.data(), state.perm.size());
  append_raw(buffer, state.links.data(), state.links.size());
  append_raw(buffer, state.beads.data(), state.beads.size());
  io::write_file_atomic(path, buffer);
}

WorldLines load_worldlines(const std::string& path,
                           const std::string& expected_digest) {
  std::string buffer = io::read_file(path);
  std::size_t offset = 0;
  char magic[8];
  read_raw(buffer, offset, magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("not a world-line checkpoint (bad magic)");
  std::uint64_t digest_len = 0;
  read_raw(buffer, offset, &digest_len, 1);
  if (offset + digest_len > buffer.size())
    throw std::runtime_error("checkpoint truncated");
  std::string digest = buffer.substr(offset, digest_len);
  offset += digest_len;
  if (digest != expected_digest)
    throw std::runtime_error(
        "checkpoint belongs to a different configuration (digest mismatch)");
  std::int32_t header[3];
  read_raw(buffer, offset, header, 3);
  WorldLines state;
  state.n_particles = header[0];
  state.dim = header[1];
  state.slices = header[2];
  if (state.n_particles < 1 || state.dim < 1 || state.slices < 2)
    throw std::runtime_error("checkpoint header out of range");
  read_raw(buffer, offset, &state.box, 1);
  state.perm.resize(state.n_particles);
  state.links.resize(static_cast<long>(state.n_particles) * state.slices *
                     state.dim);
  state.beads.resize(static_cast<long>(state.n_particles) *
                     (state.slices + 1) * state.dim);
  read_raw(buffer, offset, state.perm.data(), state.perm.size());
  read_raw(buffer, offset, state.links.data(), state.links.size());
  read_raw(buffer, offset, state.beads.data(), state.beads.size());
  if (offset != buffer.size())
    throw std::runtime_error("checkpoint has trailing bytes");
  return state;
}

BalanceAudit detailed_balance_audit(const PimcConfig& cfg,
                                    std::uint64_t audit_seed) {
  PimcConfig local = cfg;
  local.validate();
  if (local.n_particles < 2)
    throw std::invalid_argument("audit needs at least two particles");
  WorldLines state = initial_state(local);
  Rng rng(audit_seed);

  // Decorrelate away from the straight-strand start with real moves.
  // Translations are left out: rewrapping can push a strand's bookkeeping
  // winding one step past the sampling window, where the reverse proposal
  // density is pinned to zero and the comparison below loses meaning.
  MoveStats scratch_a, scratch_b;
  for (int warm = 0; warm < 25; ++warm) {
    for (int k = 0; k < local.n_particles; ++k)
      move_swap(state, local, rng, scratch_a, scratch_b);
    for (int k = 0; k < local.n_particles; ++k)
      move_redraw(state, local, rng, scratch_a);
  }

  int dim = state.dim;
  int i = 0;
  int j = 1;
  int ti = state.perm[i];
  int tj = state.perm[j];
  double lambda = local.system.lambda;

  double log_pi_old = log_free_weight(state, local) - action(state, local);
  std::vector<double> old_path_i = unreduced_strand(state, i);
  std::vector<double> old_path_j = unreduced_strand(state, j);
  std::vector<double> y_old_i(state.bead(ti, 0), state.bead(ti, 0) + dim);
  std::vector<double> y_old_j(state.bead(tj, 0), state.bead(tj, 0) + dim);

  std::vector<double> d_old_i(dim), d_old_j(dim), d_new_i(dim), d_new_j(dim);
  for (int c = 0; c < dim; ++c) {
    d_old_i[c] = y_old_i[c] - state.bead(i, 0)[c];
    d_old_j[c] = y_old_j[c] - state.bead(j, 0)[c];
    d_new_i[c] = y_old_j[c] - state.bead(i, 0)[c];
    d_new_j[c] = y_old_i[c] - state.bead(j, 0)[c];
  }
  double action_old = action(state, local);
  double log_impl =
      kernel_log_weight(d_new_i, lambda, state.box, local.winding_shells) +
      kernel_log_weight(d_new_j, lambda, state.box, local.winding_shells) -
      kernel_log_weight(d_old_i, lambda, state.box, local.winding_shells) -
      kernel_log_weight(d_old_j, lambda, state.box, local.winding_shells);

  BridgeDraw draw_i =
      sample_bridge(std::span<const double>(state.bead(i, 0), dim), y_old_j,
                    lambda, state.box, state.slices, local.winding_shells,
                    rng);
  BridgeDraw draw_j =
      sample_bridge(std::span<const double>(state.bead(j, 0), dim), y_old_i,
                    lambda, state.box, state.slices, local.winding_shells,
                    rng);
  double log_q_forward = draw_i.log_density + draw_j.log_density;
  state.perm[i] = tj;
  state.perm[j] = ti;
  install_strand(state, i, draw_i, y_old_j);
  install_strand(state, j, draw_j, y_old_i);
  double action_new = action(state, local);
  log_impl -= action_new - action_old;

  double log_pi_new = log_free_weight(state, local) - action_new;
  double log_q_reverse =
      bridge_log_density(old_path_i, y_old_i, lambda, state.box, state.slices,
                         local.winding_shells) +
      bridge_log_density(old_path_j, y_old_j, lambda, state.box, state.slices,
                         local.winding_shells);

  BalanceAudit audit;
  audit.log_ratio_implementation = log_impl;
  audit.log_ratio_explicit =
      (log_pi_new + log_q_reverse) - (log_pi_old + log_q_forward);
  audit.residual =
      std::abs(audit.log_ratio_implementation - audit.log_ratio_explicit);
  return audit;
}

}  // namespace cyclelab::pimc
