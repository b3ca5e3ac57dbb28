#include "declsolve/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "declsolve/error.hpp"

namespace declsolve::corpus {
namespace {

constexpr std::array<std::string_view, 8> kReferenceOrder{
    "l1_logreg", "l2_logreg", "svm", "elastic_net",
    "nnls", "symnmf", "nonlinear_ls", "compressed_sensing"};

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

Dense gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  Dense d(rows, cols);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = rng.normal();
  return d;
}

Dense uniform(Rng& rng, std::size_t rows, std::size_t cols) {
  Dense d(rows, cols);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = rng.uniform();
  return d;
}

Dense matvec(const Dense& a, const Dense& x) {
  Dense out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

double squared_norm(const Dense& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return s;
}

// k distinct indices from [0, n), partial Fisher-Yates.
std::vector<std::size_t> choose(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Two Gaussian clouds with centers +-shift along the all-ones direction.
LabeledData clouds(Rng& rng, std::size_t m, std::size_t dim, double shift) {
  LabeledData d{Dense(m, dim), Dense(m, 1)};
  const double offset = shift / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < m; ++i) {
    const double label = (i % 2 == 0) ? 1.0 : -1.0;
    d.y[i] = label;
    for (std::size_t j = 0; j < dim; ++j) d.X(i, j) = label * offset + rng.normal();
  }
  return d;
}

GeneratedInstance named(std::string model, std::uint64_t seed) {
  GeneratedInstance g;
  g.name = model;
  g.model = std::move(model);
  g.seed = seed;
  return g;
}

}  // namespace

std::vector<ModelText> list_models() {
  std::vector<ModelText> out;
  for (std::string_view name : kReferenceOrder) {
    for (const ModelText& m : detail::embedded_models()) {
      if (m.group == "models" && m.name == name) out.push_back(m);
    }
  }
  return out;
}

std::vector<ModelText> extra_models() {
  std::vector<ModelText> out;
  for (const ModelText& m : detail::embedded_models()) {
    if (m.group != "models") out.push_back(m);
  }
  return out;
}

std::optional<ModelText> find_model(std::string_view name) {
  for (const ModelText& m : detail::embedded_models()) {
    if (m.name == name) return m;
  }
  return std::nullopt;
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t Rng::below(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return static_cast<std::size_t>(r % bound);
}

GeneratedInstance gen_elasticnet(std::size_t m, std::size_t n, std::uint64_t seed, double lambda,
                                 double alpha) {
  Rng rng(seed);
  GeneratedInstance g = named("elastic_net", seed);
  Dense X = gaussian(rng, m, n);
  Dense beta(n, 1);
  for (std::size_t j = 1; j <= n; ++j) {
    beta[j - 1] = ((j % 2 == 0) ? 1.0 : -1.0) * std::exp(-static_cast<double>(j) / 10.0);
  }
  Dense signal = matvec(X, beta);
  Dense z = gaussian(rng, m, 1);
  const double k = std::sqrt(squared_norm(signal) / (3.0 * squared_norm(z)));
  Dense y(m, 1);
  for (std::size_t i = 0; i < m; ++i) y[i] = signal[i] + k * z[i];
  g.data.set("X", std::move(X));
  g.data.set("y", std::move(y));
  g.data.set("n", Dense::scalar(1.0 / (2.0 * static_cast<double>(m))));
  g.data.set("a1", Dense::scalar(alpha * lambda));
  g.data.set("a2", Dense::scalar((1.0 - alpha) * lambda / 2.0));
  g.truth["beta"] = std::move(beta);
  g.truth["noise_scale"] = Dense::scalar(k);
  g.truth["noise"] = std::move(z);
  return g;
}

GeneratedInstance gen_nnls(NnlsVariant variant, std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedInstance g = named("nnls", seed);
  g.name = variant == NnlsVariant::kI ? "nnls_i" : "nnls_ii";
  const bool first = variant == NnlsVariant::kI;
  Dense A = first ? uniform(rng, m, n) : gaussian(rng, m, n);
  const double density = first ? 0.01 : 0.1;
  const auto nnz = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
  Dense x(n, 1);
  for (std::size_t j : choose(rng, n, nnz)) x[j] = rng.uniform();
  const double scale = first ? std::sqrt(0.003) : std::sqrt(1.0 / 6000.0);
  Dense ax = matvec(A, x);
  Dense b(m, 1);
  for (std::size_t i = 0; i < m; ++i) b[i] = scale * ax[i] + 0.003 * rng.normal();
  g.data.set("A", std::move(A));
  g.data.set("b", std::move(b));
  g.truth["x"] = std::move(x);
  return g;
}

GeneratedInstance gen_symnmf(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedInstance g = named("symnmf", seed);
  Dense U(n, k);
  for (std::size_t i = 0; i < U.size(); ++i) U[i] = std::fabs(rng.normal());
  Dense X(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += U(i, l) * U(j, l);
      X(i, j) = s;
      X(j, i) = s;
    }
  }
  g.data.set("X", std::move(X));
  g.data.set_symmetric("X", true);
  g.truth["U"] = std::move(U);
  g.optimal_value = 0.0;
  g.sizes["U"] = {n, k};
  return g;
}

GeneratedInstance gen_compressed_sensing(std::size_t m, std::size_t n, std::size_t nnz,
                                         std::uint64_t seed) {
  Rng rng(seed);
  GeneratedInstance g = named("compressed_sensing", seed);
  Dense A = gaussian(rng, m, n);
  // Modified Gram-Schmidt over rows, two passes for orthogonality to rounding.
  for (std::size_t i = 0; i < m; ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t r = 0; r < i; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += A(i, j) * A(r, j);
        for (std::size_t j = 0; j < n; ++j) A(i, j) -= dot * A(r, j);
      }
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) norm += A(i, j) * A(i, j);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < n; ++j) A(i, j) /= norm;
  }
  Dense x(n, 1);
  for (std::size_t j : choose(rng, n, nnz)) x[j] = rng.normal();
  Dense b = matvec(A, x);
  g.data.set("A", std::move(A));
  g.data.set("b", std::move(b));
  g.truth["x"] = std::move(x);
  return g;
}

GeneratedInstance gen_nonlinear_ls(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedInstance g = named("nonlinear_ls", seed);
  Dense X = gaussian(rng, m, n);
  Dense w = gaussian(rng, n, 1);
  Dense s = matvec(X, w);
  Dense b(m, 1);
  Dense y(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-s[i]));
    b[i] = rng.uniform() < p ? 1.0 : 0.0;
    y[i] = b[i] - 1.0;
  }
  g.data.set("X", std::move(X));
  g.data.set("y", std::move(y));
  g.data.set("s", Dense::scalar(1.0 / static_cast<double>(m)));
  g.truth["b"] = std::move(b);
  g.truth["w"] = std::move(w);
  return g;
}

GeneratedInstance gen_svm(std::size_t m, std::size_t dim, std::uint64_t seed, double gamma,
                          double c) {
  Rng rng(seed);
  GeneratedInstance g = named("svm", seed);
  LabeledData d = clouds(rng, m, dim, 1.5);
  g.data = svm_bindings(d, gamma, c);
  g.truth["points"] = std::move(d.X);
  return g;
}

GeneratedInstance gen_logreg(std::size_t m, std::size_t n, std::uint64_t seed, double lambda) {
  Rng rng(seed);
  GeneratedInstance g = named("l2_logreg", seed);
  LabeledData d = clouds(rng, m, n, 1.0);
  g.data = logreg_bindings(d, lambda);
  return g;
}

GeneratedInstance gen_packing_lp(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GeneratedInstance g = named("packing_lp", seed);
  Dense A(m, n);
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = 0.1 + rng.uniform();
  Dense b(m, 1);
  for (std::size_t i = 0; i < m; ++i) b[i] = 1.0 + rng.uniform();
  Dense c(n, 1);
  for (std::size_t j = 0; j < n; ++j) c[j] = 0.5 + rng.uniform();
  g.data.set("A", std::move(A));
  g.data.set("b", std::move(b));
  g.data.set("c", std::move(c));
  return g;
}

LabeledData parse_libsvm(std::string_view text, std::size_t min_features) {
  struct Row {
    double label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::size_t features = min_features;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream in(line);
    std::string token;
    if (!(in >> token)) {
      if (end == text.size()) break;
      continue;
    }
    auto fail = [&](const std::string& what) {
      return Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": " + what);
    };
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(token, &used);
      if (used != token.size()) throw fail("bad label '" + token + "'");
    } catch (const std::logic_error&) {
      throw fail("bad label '" + token + "'");
    }
    while (in >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw fail("expected index:value, got '" + token + "'");
      std::size_t index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        const long long raw = std::stoll(token.substr(0, colon), &used);
        if (used != colon || raw < 1) throw fail("indices are 1-based, got '" + token + "'");
        index = static_cast<std::size_t>(raw);
        const std::string v = token.substr(colon + 1);
        value = std::stod(v, &used);
        if (used != v.size()) throw fail("bad value in '" + token + "'");
      } catch (const std::logic_error&) {
        throw fail("bad entry '" + token + "'");
      }
      features = std::max(features, index);
      row.entries.emplace_back(index - 1, value);
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  LabeledData d{Dense(rows.size(), features), Dense(rows.size(), 1)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.y[i] = rows[i].label;
    for (const auto& [j, v] : rows[i].entries) d.X(i, j) = v;
  }
  return d;
}

LabeledData read_libsvm(const std::string& path, std::size_t min_features) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormat, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_libsvm(buf.str(), min_features);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

Dense rbf_kernel(const Dense& X, double gamma) {
  const std::size_t m = X.rows();
  Dense K(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    K(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      double d2 = 0.0;
      for (std::size_t l = 0; l < X.cols(); ++l) {
        const double d = X(i, l) - X(j, l);
        d2 += d * d;
      }
      K(i, j) = K(j, i) = std::exp(-gamma * d2);
    }
  }
  return K;
}

Env svm_bindings(const LabeledData& d, double gamma, double c) {
  Env env;
  env.set("K", rbf_kernel(d.X, gamma));
  env.set_symmetric("K", true);
  env.set("y", d.y);
  env.set("c", Dense::scalar(c));
  return env;
}

Env logreg_bindings(const LabeledData& d, double lambda) {
  Env env;
  env.set("X", d.X);
  env.set("y", d.y);
  env.set("c", Dense::scalar(1.0 / (lambda * static_cast<double>(d.X.rows()))));
  return env;
}

GeneratedInstance default_instance(std::string_view model, std::uint64_t seed) {
  GeneratedInstance g;
  if (model == "l1_logreg" || model == "l2_logreg") {
    g = gen_logreg(60, 5, seed, model == "l1_logreg" ? 1e-2 : 1e-4);
  } else if (model == "svm") {
    // no cap on a here: 2-d clouds give a near-singular kernel and a huge dual
    g = gen_svm(60, 5, seed);
  } else if (model == "svm_boxed") {
    g = gen_svm(60, 2, seed);
  } else if (model == "elastic_net") {
    g = gen_elasticnet(50, 20, seed);
  } else if (model == "nnls") {
    g = gen_nnls(NnlsVariant::kI, 30, 60, seed);
  } else if (model == "symnmf") {
    g = gen_symnmf(20, 3, seed);
  } else if (model == "nonlinear_ls") {
    g = gen_nonlinear_ls(40, 5, seed);
  } else if (model == "compressed_sensing") {
    g = gen_compressed_sensing(50, 80, 5, seed);
  } else if (model == "simplex_cs") {
    Rng rng(seed);
    g.data.set("A", gaussian(rng, 5, 12));
    Dense x(12, 1);
    double total = 0.0;
    for (std::size_t j : choose(rng, 12, 3)) total += (x[j] = 0.5 + rng.uniform());
    for (std::size_t j = 0; j < 12; ++j) x[j] /= total;
    g.data.set("b", matvec(g.data.at("A"), x));
    g.truth["x"] = std::move(x);
    g.seed = seed;
  } else if (model == "packing_lp") {
    g = gen_packing_lp(3, 4, seed);
  } else {
    throw Error(ErrorKind::kConfig, "no generator for model '" + std::string(model) + "'");
  }
  g.name = std::string(model);
  g.model = std::string(model);
  return g;
}

std::vector<std::string> generator_names() {
  std::vector<std::string> out;
  for (const ModelText& m : list_models()) out.emplace_back(m.name);
  for (const ModelText& m : extra_models()) out.emplace_back(m.name);
  return out;
}

}  // namespace declsolve::corpus
