#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "scopesim/controllers.hpp"
#include "scopesim/errors.hpp"
#include "scopesim/fuzzy.hpp"
#include "scopesim/integrator.hpp"
#include "scopesim/metrics.hpp"
#include "scopesim/plant.hpp"

namespace scopesim {

/// Which parameter set the GA tunes: the four PD gains, or the fifteen
/// membership right vertices (error, rate, output variables, NL..PL each).
enum class TuningTask { ga_pd, ga_flc };

struct Chromosome {
  std::vector<double> genes;
};

struct GeneBounds {
  double low{};
  double high{};
};

struct GAConfig {
  int population_size = 50;
  int generations = 100;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;    // per gene
  double mutation_sigma = 0.1;   // fraction of the gene's bound width
  int tournament_size = 3;
  int elite_count = 2;
  std::uint64_t seed = 42;
};

inline void validate(const GAConfig& c) {
  if (c.population_size < 2) throw DomainError("population_size must be >= 2");
  if (c.generations < 0) throw DomainError("generations must be >= 0");
  if (c.elite_count < 0 || c.elite_count >= c.population_size) {
    throw DomainError("elite_count must be in [0, population_size)");
  }
  if (c.crossover_rate < 0.0 || c.crossover_rate > 1.0 ||
      c.mutation_rate < 0.0 || c.mutation_rate > 1.0) {
    throw DomainError("rates must be in [0, 1]");
  }
  if (c.mutation_sigma < 0.0) throw DomainError("mutation_sigma must be >= 0");
  if (c.tournament_size < 1 || c.tournament_size > c.population_size) {
    throw DomainError("tournament_size must be in [1, population_size]");
  }
}

/// Fitness of one candidate. Infeasible candidates (diverged simulations)
/// carry a penalty strictly above every feasible value; earlier divergence is
/// penalized harder.
struct FitnessReport {
  double value = 0.0;
  bool feasible = true;
  SimTrace trace;
};

inline constexpr double kDivergencePenaltyBase = 1e9;

/// Per-gene search intervals. GA-PD: kp in [1, 400], kd in [0.1, 60] per
/// joint, ordered (kp1, kd1, kp2, kd2). GA-FLC: each right vertex moves in
/// (peak, peak + 2 * half_width], except the output PL vertex which is capped
/// at 50.
inline std::vector<GeneBounds> encode_bounds(TuningTask task) {
  if (task == TuningTask::ga_pd) {
    return {{1.0, 400.0}, {0.1, 60.0}, {1.0, 400.0}, {0.1, 60.0}};
  }
  std::vector<GeneBounds> bounds;
  bounds.reserve(15);
  const FuzzyControllerDef def = default_fuzzy_controller();
  const struct {
    const FuzzyVariable* var;
    double half_width;
  } vars[] = {{&def.error, kErrorHalfWidth},
              {&def.error_rate, kRateHalfWidth},
              {&def.output, kOutputHalfWidth}};
  for (const auto& [var, hw] : vars) {
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      const double peak = var->mfs[k].peak;
      double high = peak + 2.0 * hw;
      if (var == &def.output && k == kLabelCount - 1) {
        high = std::min(high, 50.0);
      }
      bounds.push_back(GeneBounds{peak, high});
    }
  }
  return bounds;
}

/// Gene vector matching the untuned defaults: the baseline PD gains, or the
/// stock membership right vertices.
inline Chromosome baseline_chromosome(TuningTask task) {
  if (task == TuningTask::ga_pd) {
    const PDGains g = ziegler_nichols_baseline(default_plant());
    return Chromosome{{g.kp[0], g.kd[0], g.kp[1], g.kd[1]}};
  }
  const FuzzyControllerDef def = default_fuzzy_controller();
  Chromosome c;
  for (const FuzzyVariable* var : {&def.error, &def.error_rate, &def.output}) {
    for (const auto& mf : var->mfs) c.genes.push_back(mf.right);
  }
  return c;
}

/// Clamps genes into bounds and restores right-vertex ordering for GA-FLC:
/// a right vertex at or below its peak is pushed just above it.
inline Chromosome repair(TuningTask task, Chromosome c,
                         std::span<const GeneBounds> bounds) {
  for (std::size_t g = 0; g < c.genes.size(); ++g) {
    c.genes[g] = std::clamp(c.genes[g], bounds[g].low, bounds[g].high);
  }
  if (task == TuningTask::ga_flc) {
    for (std::size_t g = 0; g < c.genes.size(); ++g) {
      const double peak = bounds[g].low;  // lower bound sits at the peak
      if (c.genes[g] <= peak) {
        c.genes[g] = peak + 1e-3 * (bounds[g].high - bounds[g].low);
      }
    }
  }
  return c;
}

/// Builds the controller a chromosome encodes.
inline Controller decode(TuningTask task, const Chromosome& c,
                         int coa_resolution = kDefaultCoaResolution) {
  Controller out;
  if (task == TuningTask::ga_pd) {
    if (c.genes.size() != 4) throw DomainError("ga-pd chromosome needs 4 genes");
    out.kind = ControllerKind::ga_pd;
    out.gains = PDGains{Vec2{{c.genes[0], c.genes[2]}},
                        Vec2{{c.genes[1], c.genes[3]}}};
    return out;
  }
  if (c.genes.size() != 15) throw DomainError("ga-flc chromosome needs 15 genes");
  out.kind = ControllerKind::ga_flc;
  out.fuzzy = default_fuzzy_controller();
  out.coa_resolution = coa_resolution;
  FuzzyVariable* vars[] = {&out.fuzzy.error, &out.fuzzy.error_rate,
                           &out.fuzzy.output};
  std::size_t g = 0;
  for (FuzzyVariable* var : vars) {
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      var->mfs[k].right = c.genes[g++];
    }
  }
  return out;
}

/// Decodes, simulates the default step experiment, and integrates the
/// weighted absolute-error fitness. Divergence is folded into the report as
/// an infeasibility penalty rather than thrown.
inline FitnessReport evaluate_fitness(const Chromosome& c, TuningTask task,
                                      const PlantParams& plant,
                                      const SimConfig& sim_cfg,
                                      int coa_resolution = kDefaultCoaResolution) {
  const auto bounds = encode_bounds(task);
  const Chromosome repaired = repair(task, c, bounds);
  const Controller controller = decode(task, repaired, coa_resolution);
  FitnessReport report;
  try {
    const TorqueLaw law(controller, plant);
    report.trace = simulate(plant, law, sim_cfg);
    report.value = itae_value(report.trace, sim_cfg.theta_dot_desired);
    report.feasible = true;
  } catch (const DivergedError& e) {
    report.feasible = false;
    const auto total = static_cast<double>(step_count(sim_cfg));
    report.value = kDivergencePenaltyBase +
                   (total - static_cast<double>(e.step()));
    report.trace = SimTrace{};
  }
  return report;
}

/// Uniform tournament with replacement; returns the index of the best
/// (minimum fitness) contender, ties broken toward the lowest index.
inline std::size_t select_tournament(std::span<const double> fitnesses,
                                     int tournament_size,
                                     std::mt19937_64& rng) {
  if (fitnesses.empty()) throw DomainError("empty population");
  std::uniform_int_distribution<std::size_t> pick(0, fitnesses.size() - 1);
  std::size_t best = pick(rng);
  for (int i = 1; i < tournament_size; ++i) {
    const std::size_t j = pick(rng);
    if (fitnesses[j] < fitnesses[best] ||
        (fitnesses[j] == fitnesses[best] && j < best)) {
      best = j;
    }
  }
  return best;
}

/// BLX-0.5 blend crossover: with probability `rate`, each gene pair (x, y)
/// yields two samples drawn uniformly from [min - d/2, max + d/2] with
/// d = |x - y|, clamped to bounds; otherwise the parents are copied.
inline std::pair<Chromosome, Chromosome> crossover_blx(
    const Chromosome& a, const Chromosome& b, double rate,
    std::span<const GeneBounds> bounds, std::mt19937_64& rng) {
  if (a.genes.size() != b.genes.size()) {
    throw DomainError("crossover requires equal-length parents");
  }
  Chromosome c1 = a, c2 = b;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= rate) return {c1, c2};
  for (std::size_t g = 0; g < a.genes.size(); ++g) {
    const double x = a.genes[g], y = b.genes[g];
    const double d = std::abs(x - y);
    const double lo = std::min(x, y) - 0.5 * d;
    const double hi = std::max(x, y) + 0.5 * d;
    std::uniform_real_distribution<double> blend(lo, hi);
    c1.genes[g] = std::clamp(blend(rng), bounds[g].low, bounds[g].high);
    c2.genes[g] = std::clamp(blend(rng), bounds[g].low, bounds[g].high);
  }
  return {c1, c2};
}

/// Per-gene Gaussian mutation with standard deviation sigma_fraction times
/// the gene's bound width, clamped and repaired.
inline Chromosome mutate_gaussian(Chromosome c, TuningTask task, double rate,
                                  double sigma_fraction,
                                  std::span<const GeneBounds> bounds,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t g = 0; g < c.genes.size(); ++g) {
    if (unit(rng) < rate) {
      std::normal_distribution<double> noise(
          0.0, sigma_fraction * (bounds[g].high - bounds[g].low));
      c.genes[g] += noise(rng);
    }
  }
  return repair(task, std::move(c), bounds);
}

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent deterministic substream for (seed, generation, index); makes
/// results reproducible and independent of evaluation order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t generation,
                                 std::uint64_t index) {
  return std::mt19937_64(mix64(seed ^ mix64(generation ^ mix64(index))));
}

/// Runs fn(i) for i in [0, n) on a small worker pool; results must be written
/// to index-addressed slots by the caller so the outcome is order-independent.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

struct OptimizeResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<double> best_history;   // population best per generation
  std::vector<double> mean_history;   // population mean per generation
};

/// Generational real-coded GA with elitism: tournament selection, BLX-0.5
/// crossover, Gaussian mutation. Candidate fitness runs in parallel across a
/// generation; reproduction randomness comes from per-individual substreams
/// of (seed, generation, index), so repeated runs are bit-identical.
/// History entry g is the best fitness of generation g (initial population is
/// generation 0); elitism makes the sequence non-increasing.
inline OptimizeResult optimize(TuningTask task, const PlantParams& plant,
                               const SimConfig& sim_cfg, const GAConfig& ga_cfg,
                               int coa_resolution = kDefaultCoaResolution) {
  validate(ga_cfg);
  validate_sim_config(sim_cfg);
  const auto bounds = encode_bounds(task);
  const auto pop_n = static_cast<std::size_t>(ga_cfg.population_size);

  std::vector<Chromosome> pop(pop_n);
  for (std::size_t i = 0; i < pop_n; ++i) {
    auto rng = detail::substream(ga_cfg.seed, 0, i);
    Chromosome c;
    c.genes.reserve(bounds.size());
    for (const auto& b : bounds) {
      std::uniform_real_distribution<double> gene(b.low, b.high);
      c.genes.push_back(gene(rng));
    }
    pop[i] = repair(task, std::move(c), bounds);
  }

  std::vector<double> fits(pop_n);
  auto evaluate_all = [&](const std::vector<std::size_t>& todo) {
    detail::parallel_for(todo.size(), [&](std::size_t t) {
      const std::size_t i = todo[t];
      fits[i] =
          evaluate_fitness(pop[i], task, plant, sim_cfg, coa_resolution).value;
    });
  };
  std::vector<std::size_t> all(pop_n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  evaluate_all(all);

  auto ranking = [&] {
    std::vector<std::size_t> idx(pop_n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return fits[a] != fits[b] ? fits[a] < fits[b] : a < b;
    });
    return idx;
  };

  OptimizeResult result;
  auto record = [&] {
    const auto idx = ranking();
    result.best_history.push_back(fits[idx[0]]);
    result.mean_history.push_back(
        std::accumulate(fits.begin(), fits.end(), 0.0) /
        static_cast<double>(pop_n));
    if (result.best_history.size() == 1 ||
        fits[idx[0]] < result.best_fitness) {
      result.best = pop[idx[0]];
      result.best_fitness = fits[idx[0]];
    }
  };
  record();

  const auto elite_n = static_cast<std::size_t>(ga_cfg.elite_count);
  for (int gen = 1; gen <= ga_cfg.generations; ++gen) {
    const auto idx = ranking();
    std::vector<Chromosome> next(pop_n);
    std::vector<double> next_fits(pop_n, 0.0);
    for (std::size_t e = 0; e < elite_n; ++e) {
      next[e] = pop[idx[e]];
      next_fits[e] = fits[idx[e]];
    }
    std::vector<std::size_t> todo;
    std::size_t child = elite_n;
    while (child < pop_n) {
      auto rng = detail::substream(ga_cfg.seed, static_cast<std::uint64_t>(gen),
                                   child);
      const std::size_t pa =
          select_tournament(fits, ga_cfg.tournament_size, rng);
      const std::size_t pb =
          select_tournament(fits, ga_cfg.tournament_size, rng);
      auto [c1, c2] =
          crossover_blx(pop[pa], pop[pb], ga_cfg.crossover_rate, bounds, rng);
      c1 = mutate_gaussian(std::move(c1), task, ga_cfg.mutation_rate,
                           ga_cfg.mutation_sigma, bounds, rng);
      c2 = mutate_gaussian(std::move(c2), task, ga_cfg.mutation_rate,
                           ga_cfg.mutation_sigma, bounds, rng);
      next[child] = std::move(c1);
      todo.push_back(child);
      ++child;
      if (child < pop_n) {
        next[child] = std::move(c2);
        todo.push_back(child);
        ++child;
      }
    }
    pop = std::move(next);
    fits = std::move(next_fits);
    evaluate_all(todo);
    record();
  }
  return result;
}

}  // namespace scopesim
