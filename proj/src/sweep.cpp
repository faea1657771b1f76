#include "ved/sweep.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ved/binary_io.hpp"
#include "ved/errors.hpp"

namespace ved {

std::string cell_name(int r, double beta, double lambda) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "r%d_beta%g_lambda%g", r, beta, lambda);
  return buf;
}

SweepResult run_sweep(const Dataset& data, const ArchConfig& arch, const TrainConfig& base, const SweepGrid& grid,
                      const std::filesystem::path& out_dir) {
  if (grid.r.empty() || grid.beta.empty() || grid.lambda.empty()) throw ConfigError("sweep grids must be non-empty");
  base.validate();
  const PreparedData prepared = prepare_data(data, base.train_size, base.test_size);

  SweepResult res;
  for (int r : grid.r) {
    for (double beta : grid.beta) {
      for (double lambda : grid.lambda) {
        SweepCell cell;
        cell.r = r;
        cell.beta = beta;
        cell.lambda = lambda;
        TrainConfig cfg = base;
        cfg.beta = Schedule::constant(beta);
        cfg.lambda = Schedule::constant(lambda);
        if (!out_dir.empty()) cfg.out_dir = cell.run_dir = out_dir / cell_name(r, beta, lambda);
        if (base.verbose) std::cerr << "sweep cell " << cell_name(r, beta, lambda) << "\n";
        try {
          ArchConfig cell_arch = arch;
          cell_arch.latent_dim = r;
          const TrainResult tr = train(prepared, cell_arch, cfg);
          cell.ok = true;
          cell.best_mse = tr.metrics.best_mse;
          cell.best_kld = tr.metrics.best_kld;
          cell.best_epoch = tr.metrics.best_epoch;
          cell.seconds = tr.metrics.seconds;
        } catch (const std::exception& e) {
          cell.error = e.what();
          if (base.verbose) std::cerr << "  failed: " << e.what() << "\n";
        }
        res.cells.push_back(std::move(cell));
      }
    }
  }

  std::map<int, std::size_t> best;
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    const auto& c = res.cells[i];
    if (!c.ok) continue;
    auto it = best.find(c.r);
    if (it == best.end() || c.best_mse < res.cells[it->second].best_mse) best[c.r] = i;
  }
  for (const auto& [r, i] : best) res.cells[i].best_for_r = true;

  if (!out_dir.empty()) {
    write_sweep_csv(out_dir / "sweep.csv", res);
    write_sweep_markdown(out_dir / "sweep.md", res);
  }
  return res;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& res) {
  std::ostringstream out;
  out << "r,beta,lambda,status,best_test_mse,best_test_kld,best_epoch,best_for_r,seconds,error\n";
  out.precision(10);
  for (const auto& c : res.cells) {
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out << c.r << ',' << c.beta << ',' << c.lambda << ',' << (c.ok ? "ok" : "failed") << ',';
    if (c.ok)
      out << c.best_mse << ',' << c.best_kld << ',' << c.best_epoch << ',' << (c.best_for_r ? 1 : 0);
    else
      out << ",,,0";
    out << ',' << c.seconds << ',' << err << '\n';
  }
  write_text(path, out.str());
}

void write_sweep_markdown(const std::filesystem::path& path, const SweepResult& res) {
  std::ostringstream out;
  out << "| r | beta | lambda | test MSE | test KLD |\n|---|---|---|---|---|\n";
  char buf[64];
  for (const auto& c : res.cells) {
    out << "| " << c.r << " | " << c.beta << " | " << c.lambda << " | ";
    if (!c.ok) {
      out << "failed | - |\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.4f", c.best_mse);
    out << (c.best_for_r ? "**" + std::string(buf) + "**" : std::string(buf)) << " | ";
    std::snprintf(buf, sizeof buf, "%.4f", c.best_kld);
    out << buf << " |\n";
  }
  write_text(path, out.str());
}

}  // namespace ved
