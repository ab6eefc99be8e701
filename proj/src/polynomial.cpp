#include "momentpde/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace momentpde {

int total_degree(const MultiIndex& a) {
  int d = 0;
  for (auto e : a) d += e;
  return d;
}

bool grlex_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  // Within a degree, the monomial with more weight on earlier variables
  // comes first: (2,0) precedes (1,1) precedes (0,2).
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.size() < b.size();
}

std::size_t MultiIndexHash::operator()(const MultiIndex& a) const {
  std::size_t h = 1469598103934665603ull;
  for (auto e : a) {
    h ^= e;
    h *= 1099511628211ull;
  }
  return h;
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: product of i consecutive ints divides by i!
  }
  return r;
}

SpacePtr VariableSpace::create(
    std::vector<std::pair<std::string, std::vector<std::string>>> blocks) {
  auto sp = std::make_shared<VariableSpace>();
  int offset = 0;
  for (auto& [bname, vars] : blocks) {
    if (sp->find_block(bname) != nullptr)
      throw std::invalid_argument("duplicate block name: " + bname);
    Block b;
    b.name = bname;
    b.offset = offset;
    b.size = static_cast<int>(vars.size());
    for (auto& v : vars) {
      if (sp->index_.count(v))
        throw std::invalid_argument("duplicate variable name: " + v);
      sp->index_[v] = offset++;
      sp->names_.push_back(v);
    }
    sp->blocks_.push_back(std::move(b));
  }
  return sp;
}

int VariableSpace::find_var(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

const VariableSpace::Block* VariableSpace::find_block(
    const std::string& name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return &b;
  return nullptr;
}

bool VariableSpace::in_block(int v, const std::string& block) const {
  const Block* b = find_block(block);
  return b != nullptr && v >= b->offset && v < b->offset + b->size;
}

bool VariableSpace::same_as(const VariableSpace& other) const {
  return names_ == other.names_;
}

namespace {

void enumerate_degree(int dim, int deg, MultiIndex& cur, int pos,
                      std::vector<MultiIndex>& out) {
  if (pos == dim - 1) {
    cur[pos] = static_cast<std::uint8_t>(deg);
    out.push_back(cur);
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[pos] = static_cast<std::uint8_t>(e);
    enumerate_degree(dim, deg - e, cur, pos + 1, out);
  }
}

}  // namespace

std::vector<MultiIndex> mono_basis(int dim, int d) {
  std::vector<MultiIndex> out;
  if (dim == 0) {
    out.push_back(MultiIndex{});
    return out;
  }
  out.reserve(static_cast<std::size_t>(binomial(dim + d, d)));
  MultiIndex cur(dim, 0);
  for (int deg = 0; deg <= d; ++deg) enumerate_degree(dim, deg, cur, 0, out);
  return out;
}

std::vector<MultiIndex> mono_basis(const VariableSpace& space, int d) {
  return mono_basis(space.dim(), d);
}

std::vector<MultiIndex> mono_basis_capped(
    const VariableSpace& space, int d,
    const std::map<std::string, int>& block_caps) {
  std::vector<MultiIndex> all = mono_basis(space.dim(), d);
  if (block_caps.empty()) return all;
  std::vector<MultiIndex> out;
  out.reserve(all.size());
  for (const auto& a : all) {
    bool ok = true;
    for (const auto& [bname, cap] : block_caps) {
      const auto* b = space.find_block(bname);
      if (b == nullptr) continue;
      int bd = 0;
      for (int i = b->offset; i < b->offset + b->size; ++i) bd += a[i];
      if (bd > cap) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(a);
  }
  return out;
}

Polynomial Polynomial::constant(SpacePtr space, double c) {
  Polynomial p(std::move(space));
  if (c != 0.0) p.terms_[MultiIndex(p.space_->dim(), 0)] = c;
  return p;
}

Polynomial Polynomial::variable(SpacePtr space, int v) {
  Polynomial p(std::move(space));
  MultiIndex a(p.space_->dim(), 0);
  a.at(v) = 1;
  p.terms_[a] = 1.0;
  return p;
}

Polynomial Polynomial::monomial(SpacePtr space, const MultiIndex& a, double c) {
  Polynomial p(std::move(space));
  if (static_cast<int>(a.size()) != p.space_->dim())
    throw std::invalid_argument("monomial: multi-index dimension mismatch");
  if (c != 0.0) p.terms_[a] = c;
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [a, c] : terms_) d = std::max(d, total_degree(a));
  return d;
}

int Polynomial::degree_in_block(const std::string& block) const {
  const auto* b = space_->find_block(block);
  if (b == nullptr) return 0;
  int d = 0;
  for (const auto& [a, c] : terms_) {
    int bd = 0;
    for (int i = b->offset; i < b->offset + b->size; ++i) bd += a[i];
    d = std::max(d, bd);
  }
  return d;
}

int Polynomial::degree_in_var(int v) const {
  int d = 0;
  for (const auto& [a, c] : terms_) d = std::max(d, static_cast<int>(a[v]));
  return d;
}

bool Polynomial::depends_on(int v) const { return degree_in_var(v) > 0; }

bool Polynomial::depends_on_block(const std::string& block) const {
  return degree_in_block(block) > 0;
}

double Polynomial::coefficient(const MultiIndex& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::set_coefficient(const MultiIndex& a, double c) {
  if (c == 0.0)
    terms_.erase(a);
  else
    terms_[a] = c;
}

void Polynomial::add_term(const MultiIndex& a, double c) {
  auto it = terms_.find(a);
  if (it == terms_.end()) {
    if (c != 0.0) terms_[a] = c;
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  if (!space_) space_ = q.space_;
  if (q.space_ && !space_->same_as(*q.space_))
    throw std::invalid_argument("polynomial addition: variable space mismatch");
  for (const auto& [a, c] : q.terms_) add_term(a, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& q) {
  if (!space_) space_ = q.space_;
  if (q.space_ && !space_->same_as(*q.space_))
    throw std::invalid_argument("polynomial subtraction: variable space mismatch");
  for (const auto& [a, c] : q.terms_) add_term(a, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, v] : terms_) v *= c;
  return *this;
}

bool Polynomial::same_terms(const Polynomial& q, double tol) const {
  Polynomial diff = *this;
  diff -= q;
  for (const auto& [a, c] : diff.terms())
    if (std::abs(c) > tol) return false;
  return true;
}

double Polynomial::eval(const std::vector<double>& point) const {
  if (static_cast<int>(point.size()) != space_->dim())
    throw std::invalid_argument("eval: point dimension mismatch");
  double total = 0.0;
  for (const auto& [a, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int e = 0; e < a[i]; ++e) t *= point[i];
    }
    total += t;
  }
  return total;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [a, c] : terms_) {
    double coef = c;
    if (first) {
      if (coef < 0) {
        os << "-";
        coef = -coef;
      }
    } else {
      os << (coef < 0 ? " - " : " + ");
      coef = std::abs(coef);
    }
    first = false;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", coef);
    const bool is_const = total_degree(a) == 0;
    const bool unit = (coef == 1.0);
    if (!unit || is_const) os << buf;
    bool need_star = !unit || is_const;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      if (need_star) os << "*";
      os << space_->var_name(static_cast<int>(i));
      if (a[i] > 1) os << "^" << static_cast<int>(a[i]);
      need_star = true;
    }
  }
  return os.str();
}

Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
  if (p.space() && q.space() && !p.space()->same_as(*q.space()))
    throw std::invalid_argument("polynomial product: variable space mismatch");
  Polynomial r(p.space() ? p.space() : q.space());
  for (const auto& [a, ca] : p.terms()) {
    for (const auto& [b, cb] : q.terms()) {
      MultiIndex s(a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        s[i] = static_cast<std::uint8_t>(a[i] + b[i]);
      r.add_term(s, ca * cb);
    }
  }
  return r;
}

Polynomial poly_pow(const Polynomial& p, int k) {
  Polynomial r = Polynomial::constant(p.space(), 1.0);
  for (int i = 0; i < k; ++i) r = poly_mul(r, p);
  return r;
}

Polynomial poly_diff(const Polynomial& p, int v) {
  Polynomial r(p.space());
  for (const auto& [a, c] : p.terms()) {
    if (a[v] == 0) continue;
    MultiIndex b = a;
    b[v] = static_cast<std::uint8_t>(b[v] - 1);
    r.add_term(b, c * a[v]);
  }
  return r;
}

Polynomial poly_substitute(const Polynomial& p, const SpacePtr& target,
                           const std::map<int, Polynomial>& images) {
  Polynomial out(target);
  // Per-variable images resolved once.
  const int dim = p.space()->dim();
  std::vector<const Polynomial*> image(dim, nullptr);
  std::vector<Polynomial> identity_cache;
  identity_cache.reserve(dim);
  std::vector<int> identity_index(dim, -1);
  for (int v = 0; v < dim; ++v) {
    auto it = images.find(v);
    if (it != images.end()) {
      image[v] = &it->second;
      if (it->second.space() && !it->second.space()->same_as(*target))
        throw std::invalid_argument("substitute: image not over target space");
    }
  }
  for (const auto& [a, c] : p.terms()) {
    Polynomial term = Polynomial::constant(target, c);
    for (int v = 0; v < dim; ++v) {
      if (a[v] == 0) continue;
      const Polynomial* img = image[v];
      if (img == nullptr) {
        if (identity_index[v] < 0) {
          int tv = target->find_var(p.space()->var_name(v));
          if (tv < 0)
            throw std::invalid_argument(
                "substitute: variable " + p.space()->var_name(v) +
                " has no image and is absent from the target space");
          identity_index[v] = static_cast<int>(identity_cache.size());
          identity_cache.push_back(Polynomial::variable(target, tv));
        }
        img = &identity_cache[identity_index[v]];
      }
      term = poly_mul(term, poly_pow(*img, a[v]));
    }
    out += term;
  }
  return out;
}

Polynomial poly_reinterpret(const Polynomial& p, const SpacePtr& target) {
  return poly_substitute(p, target, {});
}

Polynomial poly_affine_substitute(const Polynomial& p,
                                  const std::vector<double>& shift,
                                  const std::vector<double>& scale) {
  const int dim = p.space()->dim();
  if (static_cast<int>(shift.size()) != dim ||
      static_cast<int>(scale.size()) != dim)
    throw std::invalid_argument("affine substitute: map dimension mismatch");
  std::map<int, Polynomial> images;
  for (int v = 0; v < dim; ++v) {
    if (shift[v] == 0.0 && scale[v] == 1.0) continue;
    Polynomial img = Polynomial::variable(p.space(), v) * scale[v];
    img += Polynomial::constant(p.space(), shift[v]);
    images.emplace(v, std::move(img));
  }
  return poly_substitute(p, p.space(), images);
}

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
      pos_(pos) {}

namespace {

class PolyParser {
 public:
  PolyParser(const std::string& text, SpacePtr space)
      : text_(text), space_(std::move(space)) {}

  Polynomial parse() {
    Polynomial p = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return p;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Polynomial parse_expr() {
    Polynomial acc(space_);
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      eat('+');
    acc += parse_term() * (neg ? -1.0 : 1.0);
    for (;;) {
      if (eat('+'))
        acc += parse_term();
      else if (eat('-'))
        acc -= parse_term();
      else
        break;
    }
    return acc;
  }

  Polynomial parse_term() {
    Polynomial acc = parse_factor();
    while (eat('*')) acc = poly_mul(acc, parse_factor());
    if (peek() == '/') throw ParseError("division is not supported", pos_);
    return acc;
  }

  Polynomial parse_factor() {
    Polynomial base = parse_primary();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      int k = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        k = k * 10 + (text_[pos_] - '0');
        ++pos_;
      }
      if (pos_ == start) throw ParseError("expected a nonnegative integer exponent", pos_);
      return poly_pow(base, k);
    }
    return base;
  }

  Polynomial parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return -parse_factor();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      return Polynomial::constant(space_, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      int v = space_->find_var(name);
      if (v < 0) throw ParseError("unknown variable '" + name + "'", start);
      return Polynomial::variable(space_, v);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& text_;
  SpacePtr space_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const SpacePtr& space) {
  return PolyParser(text, space).parse();
}

}  // namespace momentpde
