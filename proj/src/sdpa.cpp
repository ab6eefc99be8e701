#include "momentpde/sdpa.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace momentpde {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string export_sdpa(const ConicProblem& p) {
  const int m_rows = static_cast<int>(p.rows.size());
  std::ostringstream os;
  os << "* produced by momentpde (SDPA sparse format)\n";
  if (m_rows > 0) os << "*eqrows " << m_rows << "\n";
  os << p.nvars << "\n";
  const int nblocks = static_cast<int>(p.blocks.size()) + (m_rows > 0 ? 2 : 0);
  os << nblocks << "\n";
  for (std::size_t j = 0; j < p.blocks.size(); ++j) {
    if (j) os << " ";
    os << p.blocks[j].size;
  }
  if (m_rows > 0) {
    if (!p.blocks.empty()) os << " ";
    os << -m_rows << " " << -m_rows;
  }
  os << "\n";
  for (int i = 0; i < p.nvars; ++i) {
    if (i) os << " ";
    os << fmt(p.c.size() > i ? p.c[i] : 0.0);
  }
  os << "\n";

  // F0 of the PSD blocks (affine constants), then the equality encoding.
  for (std::size_t j = 0; j < p.blocks.size(); ++j)
    for (const auto& e : p.blocks[j].constant)
      os << "0 " << (j + 1) << " " << (e.r + 1) << " " << (e.c + 1) << " "
         << fmt(e.coef) << "\n";
  const int eq_plus = static_cast<int>(p.blocks.size()) + 1;
  const int eq_minus = eq_plus + 1;
  for (int i = 0; i < m_rows; ++i) {
    if (p.rows[i].rhs != 0.0) {
      os << "0 " << eq_plus << " " << (i + 1) << " " << (i + 1) << " "
         << fmt(p.rows[i].rhs) << "\n";
      os << "0 " << eq_minus << " " << (i + 1) << " " << (i + 1) << " "
         << fmt(-p.rows[i].rhs) << "\n";
    }
  }

  // F_k, one variable at a time, PSD blocks then equality blocks.
  for (int k = 0; k < p.nvars; ++k) {
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
      const ConicBlock& B = p.blocks[j];
      for (std::size_t l = 0; l < B.vars.size(); ++l) {
        if (B.vars[l] != k) continue;
        for (const auto& e : B.entries[l])
          os << (k + 1) << " " << (j + 1) << " " << (e.r + 1) << " "
             << (e.c + 1) << " " << fmt(e.coef) << "\n";
      }
    }
    for (int i = 0; i < m_rows; ++i) {
      for (const auto& [col, coef] : p.rows[i].terms) {
        if (col != k || coef == 0.0) continue;
        os << (k + 1) << " " << eq_plus << " " << (i + 1) << " " << (i + 1)
           << " " << fmt(coef) << "\n";
        os << (k + 1) << " " << eq_minus << " " << (i + 1) << " " << (i + 1)
           << " " << fmt(-coef) << "\n";
      }
    }
  }
  return os.str();
}

ConicProblem import_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int eqrows = -1;

  // Header comments.
  std::streampos data_start = in.tellg();
  while (std::getline(in, line)) {
    if (line.empty()) {
      data_start = in.tellg();
      continue;
    }
    if (line[0] == '*' || line[0] == '"') {
      if (line.rfind("*eqrows", 0) == 0)
        eqrows = std::stoi(line.substr(7));
      data_start = in.tellg();
      continue;
    }
    break;
  }
  in.seekg(data_start);

  auto next_numbers = [&in](int count) {
    std::vector<double> vals;
    vals.reserve(count);
    while (static_cast<int>(vals.size()) < count) {
      int ch = in.get();
      if (ch == EOF)
        throw std::runtime_error("sdpa import: unexpected end of file");
      if (std::isspace(ch) || ch == ',' || ch == '{' || ch == '}' ||
          ch == '(' || ch == ')')
        continue;
      in.unget();
      double v;
      if (!(in >> v)) throw std::runtime_error("sdpa import: malformed number");
      vals.push_back(v);
    }
    return vals;
  };

  const int nvars = static_cast<int>(next_numbers(1)[0]);
  const int nblocks = static_cast<int>(next_numbers(1)[0]);
  std::vector<int> bsizes(nblocks);
  for (int j = 0; j < nblocks; ++j)
    bsizes[j] = static_cast<int>(next_numbers(1)[0]);
  std::vector<double> cvals = next_numbers(nvars);

  ConicProblem p;
  p.nvars = nvars;
  p.c = Eigen::VectorXd::Zero(nvars);
  for (int i = 0; i < nvars; ++i) p.c[i] = cvals[i];

  const bool has_eq = eqrows >= 0;
  if (has_eq) {
    if (nblocks < 2 || bsizes[nblocks - 1] != -eqrows ||
        bsizes[nblocks - 2] != -eqrows)
      throw std::runtime_error("sdpa import: eqrows header does not match the "
                               "block structure");
  }
  const int n_psd = has_eq ? nblocks - 2 : nblocks;

  // Diagonal blocks of foreign files become runs of 1x1 PSD blocks.
  std::vector<int> block_base(nblocks, -1);  // index of first ConicBlock
  for (int j = 0; j < n_psd; ++j) {
    block_base[j] = static_cast<int>(p.blocks.size());
    if (bsizes[j] > 0) {
      ConicBlock b;
      b.size = bsizes[j];
      b.name = "block" + std::to_string(j + 1);
      p.blocks.push_back(std::move(b));
    } else {
      for (int t = 0; t < -bsizes[j]; ++t) {
        ConicBlock b;
        b.size = 1;
        b.name = "block" + std::to_string(j + 1) + "d" + std::to_string(t + 1);
        p.blocks.push_back(std::move(b));
      }
    }
  }
  if (has_eq) p.rows.resize(eqrows);

  auto add_entry = [&p](int blk_index, int var, int r, int c, double v) {
    ConicBlock& b = p.blocks[blk_index];
    if (var == 0) {
      b.constant.push_back({r, c, v});
      return;
    }
    const int col = var - 1;
    for (std::size_t l = 0; l < b.vars.size(); ++l) {
      if (b.vars[l] == col) {
        b.entries[l].push_back({r, c, v});
        return;
      }
    }
    b.vars.push_back(col);
    b.entries.push_back({{r, c, v}});
  };

  double vals[5];
  for (;;) {
    std::vector<double> tup;
    try {
      tup = next_numbers(5);
    } catch (const std::runtime_error&) {
      break;  // end of entries
    }
    for (int i = 0; i < 5; ++i) vals[i] = tup[i];
    const int matno = static_cast<int>(vals[0]);
    const int blkno = static_cast<int>(vals[1]) - 1;
    int r = static_cast<int>(vals[2]) - 1;
    int c = static_cast<int>(vals[3]) - 1;
    const double v = vals[4];
    if (blkno < 0 || blkno >= nblocks)
      throw std::runtime_error("sdpa import: block index out of range");
    if (r > c) std::swap(r, c);

    if (has_eq && blkno >= n_psd) {
      // Equality encoding: read the '+' block, ignore the mirrored one.
      if (blkno != n_psd) continue;
      if (r != c) throw std::runtime_error("sdpa import: equality block must be diagonal");
      SparseRow& row = p.rows[r];
      if (matno == 0)
        row.rhs = v;
      else
        row.terms.push_back({matno - 1, v});
      continue;
    }

    if (bsizes[blkno] > 0) {
      add_entry(block_base[blkno], matno, r, c, v);
    } else {
      if (r != c)
        throw std::runtime_error("sdpa import: off-diagonal entry in a diagonal block");
      add_entry(block_base[blkno] + r, matno, 0, 0, v);
    }
  }
  for (std::size_t i = 0; i < p.rows.size(); ++i)
    p.rows[i].tag = "sdpa-eq-" + std::to_string(i + 1);
  return p;
}

void write_sdpa_file(const std::string& path, const ConicProblem& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << export_sdpa(p);
}

ConicProblem read_sdpa_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return import_sdpa(ss.str());
}

}  // namespace momentpde
