#include "tanflow/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "tanflow/errors.hpp"
#include "tanflow/syntax.hpp"

namespace tanflow {

namespace {

constexpr int kInferArity = 64;

// "R3" -> 3
int parse_dimension(TokenStream& ts) {
  const Token tok = ts.peek();
  if (tok.kind != Token::Kind::Identifier || tok.text.size() < 2 || tok.text[0] != 'R') ts.fail("expected Rn");
  int n = 0;
  for (std::size_t i = 1; i < tok.text.size(); ++i) {
    const char c = tok.text[i];
    if (c < '0' || c > '9') ts.fail("expected Rn");
    n = n * 10 + (c - '0');
    if (n > 64) ts.fail("dimension too large");
  }
  ts.next();
  return n;
}

int expect_int(TokenStream& ts) {
  const Token tok = ts.peek();
  const double v = ts.expect_number();
  if (v != std::floor(v) || std::abs(v) > 1e6) throw ParseError("expected an integer", tok.line, tok.column);
  return static_cast<int>(v);
}

std::vector<Expr> parse_list(TokenStream& ts, int arity) {
  std::vector<Expr> out;
  out.push_back(parse_expression(ts, arity));
  while (ts.accept_symbol(",")) out.push_back(parse_expression(ts, arity));
  return out;
}

Domain parse_where(TokenStream& ts, int arity) {
  std::vector<Interval> box(static_cast<std::size_t>(arity));
  std::vector<Expr> positive;
  if (!ts.peek_identifier("where")) return Domain(std::move(box));
  ts.next();
  do {
    const Token at = ts.peek();
    const Expr lhs = parse_expression(ts, arity);
    const bool greater = ts.peek_symbol(">");
    if (!greater && !ts.peek_symbol("<")) ts.fail("expected '>' or '<'");
    ts.next();
    const double bound = ts.expect_number();
    if (lhs.op() == Expr::Op::Var) {
      Interval& iv = box[static_cast<std::size_t>(lhs.var_index())];
      (greater ? iv.lo : iv.hi) = bound;
    } else if (greater && bound == 0.0) {
      positive.push_back(lhs);
    } else {
      throw ParseError("conditions on expressions must read EXPR > 0", at.line, at.column);
    }
  } while (ts.accept_symbol(","));
  return Domain(std::move(box), std::move(positive));
}

std::string print_list(const std::vector<Expr>& es) {
  std::string out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(es[i]);
  }
  return out;
}

std::string print_where(const Domain& d) {
  std::vector<std::string> conds;
  for (int i = 0; i < d.dim(); ++i) {
    const Interval& iv = d.box()[static_cast<std::size_t>(i)];
    const std::string v = "x" + std::to_string(i + 1);
    if (std::isfinite(iv.lo)) conds.push_back(v + " > " + format_number(iv.lo));
    if (std::isfinite(iv.hi)) conds.push_back(v + " < " + format_number(iv.hi));
  }
  for (const Expr& p : d.predicates()) conds.push_back(to_string(p) + " > 0");
  if (conds.empty()) return {};
  std::string out = " where ";
  for (std::size_t i = 0; i < conds.size(); ++i) out += (i > 0 ? ", " : "") + conds[i];
  return out;
}

void check_outputs(const Token& at, std::size_t got, int expected, const std::string& what) {
  if (static_cast<int>(got) != expected) {
    throw ArityMismatch(what + " has " + std::to_string(got) + " components, expected " + std::to_string(expected),
                        at.line, at.column);
  }
}

// name: [Rn -> Rm] = exprs [where ...]
SmoothMap parse_map(TokenStream& ts, const std::string& name) {
  int n = -1;
  int m = -1;
  const Token sig = ts.peek();
  if (!ts.peek_symbol("=")) {
    n = parse_dimension(ts);
    ts.expect_symbol("->");
    m = parse_dimension(ts);
  }
  ts.expect_symbol("=");
  std::vector<Expr> outs = parse_list(ts, n < 0 ? kInferArity : n);
  if (n < 0) {
    n = 0;
    for (const Expr& e : outs) n = std::max(n, e.max_var_index() + 1);
    m = static_cast<int>(outs.size());
  }
  check_outputs(sig, outs.size(), m, "map '" + name + "'");
  Domain dom = parse_where(ts, n);
  return SmoothMap(name, n, std::move(outs), std::move(dom));
}

VectorField parse_field(TokenStream& ts, const std::string& name) {
  const Token sig = ts.peek();
  const int n = parse_dimension(ts);
  ts.expect_symbol("=");
  std::vector<Expr> comps = parse_list(ts, n);
  check_outputs(sig, comps.size(), n, "field '" + name + "'");
  Domain dom = parse_where(ts, n);
  return VectorField(name, std::move(comps), std::move(dom));
}

MultiIndex parse_wedge(TokenStream& ts, int n) {
  MultiIndex idx;
  if (ts.peek().kind != Token::Kind::Identifier || !ts.peek().text.starts_with("dx")) return idx;
  do {
    const Token tok = ts.peek();
    if (tok.kind != Token::Kind::Identifier || !tok.text.starts_with("dx") || tok.text.size() < 3) {
      ts.fail("expected dx<k>");
    }
    int k = 0;
    for (std::size_t i = 2; i < tok.text.size(); ++i) {
      if (tok.text[i] < '0' || tok.text[i] > '9') ts.fail("expected dx<k>");
      k = k * 10 + (tok.text[i] - '0');
      if (k > 64) break;
    }
    if (k < 1 || k > n) throw UndefinedVariable("'" + tok.text + "' outside dx1..dx" + std::to_string(n), tok.line, tok.column);
    if (!idx.empty() && k - 1 <= idx.back()) {
      throw ParseError("wedge factors must be strictly increasing", tok.line, tok.column);
    }
    idx.push_back(k - 1);
    ts.next();
  } while (ts.accept_symbol("^"));
  return idx;
}

NamedForm parse_form(TokenStream& ts, const std::string& name) {
  const int n = parse_dimension(ts);
  if (!ts.peek_identifier("deg")) ts.fail("expected 'deg'");
  ts.next();
  const Token deg_tok = ts.peek();
  const int degree = expect_int(ts);
  if (degree < 0 || degree > n) throw ArityMismatch("form degree outside 0..n", deg_tok.line, deg_tok.column);
  ts.expect_symbol("=");
  std::vector<std::pair<MultiIndex, Expr>> terms;
  const Token first = ts.peek();
  if (first.kind == Token::Kind::Number && first.number == 0.0 && !ts.peek_symbol("(", 1)) {
    ts.next();
  } else {
    do {
      ts.expect_symbol("(");
      Expr c = parse_expression(ts, n);
      ts.expect_symbol(")");
      const Token at = ts.peek();
      MultiIndex idx = parse_wedge(ts, n);
      if (static_cast<int>(idx.size()) != degree) {
        throw ArityMismatch("term of degree " + std::to_string(idx.size()) + " in a " + std::to_string(degree) +
                                "-form",
                            at.line, at.column);
      }
      terms.emplace_back(std::move(idx), std::move(c));
    } while (ts.accept_symbol("+"));
  }
  DifferentialForm form(n, degree, parse_where(ts, n));
  for (auto& [idx, c] : terms) form.add_term(std::move(idx), c);
  return {name, std::move(form)};
}

std::string print_form(const NamedForm& f) {
  const DifferentialForm& a = f.form;
  std::string out = "form " + f.name + ": R" + std::to_string(a.dim()) + " deg " + std::to_string(a.degree()) + " = ";
  if (a.coefficients().empty()) {
    out += "0";
  } else {
    bool first = true;
    for (const auto& [idx, c] : a.coefficients()) {
      if (!first) out += " + ";
      first = false;
      out += "(" + to_string(c) + ")";
      for (std::size_t i = 0; i < idx.size(); ++i) out += (i == 0 ? " dx" : "^dx") + std::to_string(idx[i] + 1);
    }
  }
  return out + print_where(a.domain());
}

const std::set<std::string>& builtins_with_ints() {
  static const std::set<std::string> s{"euclidean", "corner", "pasta", "gl"};
  return s;
}

SpaceDecl parse_builtin(TokenStream& ts, const std::string& name) {
  const Token tok = ts.peek();
  SpaceDecl d;
  d.name = name;
  d.builtin = ts.expect_identifier();
  const auto names = builtin_space_names();
  if (std::find(names.begin(), names.end(), d.builtin) == names.end()) {
    throw ParseError("unknown built-in space '" + d.builtin + "'", tok.line, tok.column);
  }
  if (ts.accept_symbol("(")) {
    if (d.builtin == "cusp") {
      d.squeeze = parse_expression(ts, 1);
    } else if (builtins_with_ints().contains(d.builtin)) {
      d.int_args.push_back(expect_int(ts));
      while (ts.accept_symbol(",")) d.int_args.push_back(expect_int(ts));
    } else {
      ts.fail("'" + d.builtin + "' takes no arguments");
    }
    ts.expect_symbol(")");
  }
  const std::size_t expected = d.builtin == "corner" || d.builtin == "pasta" ? 2 : 1;
  if (!d.int_args.empty() && d.int_args.size() != expected) {
    throw ArityMismatch("'" + d.builtin + "' takes " + std::to_string(expected) + " integer arguments", tok.line,
                        tok.column);
  }
  try {
    (void)d.build();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid space: ") + e.what(), tok.line, tok.column);
  }
  return d;
}

InvariantCertificate certificate_by_name(const std::string& name, const Token& at) {
  if (name == "fiberwise_sum") return fiberwise_sum_certificate();
  throw ParseError("unknown certificate '" + name + "'", at.line, at.column);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Corpus run() {
    std::size_t start = 0;
    int line = 0;
    while (start <= text_.size()) {
      const std::size_t end = text_.find('\n', start);
      const std::string_view raw = text_.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
      ++line;
      TokenStream ts(tokenize(raw, line));
      if (!ts.at_end()) {
        if (open_) {
          space_line(ts);
        } else {
          declaration(ts);
        }
        if (!ts.at_end()) ts.fail("unexpected token");
      }
      last_line_ = line;
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    if (open_) throw ParseError("space '" + open_->name + "' is missing 'end'", last_line_, 1);
    if (corpus_.empty()) throw ParseError("corpus has no declarations", std::max(last_line_, 1), 1);
    return std::move(corpus_);
  }

 private:
  std::string claim_name(TokenStream& ts) {
    const Token tok = ts.peek();
    std::string name = ts.expect_identifier();
    if (!names_.insert(name).second) throw ParseError("duplicate name '" + name + "'", tok.line, tok.column);
    return name;
  }

  void declaration(TokenStream& ts) {
    const Token head = ts.peek();
    if (head.kind != Token::Kind::Identifier) ts.fail("expected a declaration");
    const bool keyword = ts.peek_symbol(":", 1) ? false : true;
    if (!keyword) {
      const std::string name = claim_name(ts);
      ts.expect_symbol(":");
      corpus_.maps.push_back(parse_map(ts, name));
      return;
    }
    const std::string kind = ts.expect_identifier();
    if (kind == "map") {
      const std::string name = claim_name(ts);
      ts.expect_symbol(":");
      corpus_.maps.push_back(parse_map(ts, name));
    } else if (kind == "field") {
      const std::string name = claim_name(ts);
      ts.expect_symbol(":");
      corpus_.fields.push_back(parse_field(ts, name));
    } else if (kind == "form") {
      const std::string name = claim_name(ts);
      ts.expect_symbol(":");
      corpus_.forms.push_back(parse_form(ts, name));
    } else if (kind == "space") {
      const std::string name = claim_name(ts);
      if (ts.accept_symbol("=")) {
        corpus_.spaces.push_back(parse_builtin(ts, name));
      } else {
        ts.expect_symbol(":");
        const int n = parse_dimension(ts);
        open_ = SpaceDecl{};
        open_->name = name;
        open_->user = DiffSpace(name, n);
      }
    } else {
      throw ParseError("unknown declaration '" + kind + "'", head.line, head.column);
    }
  }

  void space_line(TokenStream& ts) {
    DiffSpace& s = *open_->user;
    const int n = s.ambient_dim();
    const Token head = ts.peek();
    const std::string kind = ts.expect_identifier();
    if (kind == "end") {
      corpus_.spaces.push_back(std::move(*open_));
      open_.reset();
    } else if (kind == "constraint") {
      Expr g = parse_expression(ts, n);
      Constraint::Kind k = Constraint::Kind::Equal;
      if (ts.accept_symbol(">=")) {
        k = Constraint::Kind::NonNegative;
      } else if (ts.accept_symbol(">")) {
        k = Constraint::Kind::Positive;
      } else {
        ts.expect_symbol("=");
      }
      const Token at = ts.peek();
      if (ts.expect_number() != 0.0) throw ParseError("constraints compare against 0", at.line, at.column);
      s.constrain(k, std::move(g));
    } else if (kind == "rank") {
      const Token at = ts.peek();
      const int r = expect_int(ts);
      if (r < 0) throw ParseError("rank must be non-negative", at.line, at.column);
      s.restrict_rank(r);
    } else if (kind == "plot") {
      const Token at = ts.peek();
      const std::string name = ts.expect_identifier();
      if (has_plot(s, name)) throw ParseError("duplicate plot '" + name + "'", at.line, at.column);
      ts.expect_symbol(":");
      const Token sig = ts.peek();
      const int d = parse_dimension(ts);
      ts.expect_symbol("=");
      std::vector<Expr> outs = parse_list(ts, d);
      check_outputs(sig, outs.size(), n, "plot '" + name + "'");
      Domain dom = parse_where(ts, d);
      s.add_plot(Plot{name, SmoothMap(name, d, std::move(outs), std::move(dom))});
    } else if (kind == "ident") {
      ident_line(ts, s);
    } else if (kind == "certificate") {
      const Token at = ts.peek();
      const std::string name = ts.expect_identifier();
      s.add_certificate(certificate_by_name(name, at));
      open_->certificate_names.push_back(name);
    } else if (kind == "base") {
      const Token at = ts.peek();
      Vec x{ts.expect_number()};
      while (ts.accept_symbol(",")) x.push_back(ts.expect_number());
      check_outputs(at, x.size(), n, "base point");
      s.set_base_point(std::move(x));
    } else {
      throw ParseError("unknown space entry '" + kind + "'", head.line, head.column);
    }
  }

  static bool has_plot(const DiffSpace& s, const std::string& name) {
    for (const Plot& p : s.plots()) {
      if (p.name == name) return true;
    }
    return false;
  }

  static const Plot& find_plot(TokenStream& ts, const DiffSpace& s) {
    const Token at = ts.peek();
    const std::string name = ts.expect_identifier();
    for (const Plot& p : s.plots()) {
      if (p.name == name) return p;
    }
    throw ParseError("unknown plot '" + name + "'", at.line, at.column);
  }

  static void ident_line(TokenStream& ts, DiffSpace& s) {
    const Token at = ts.peek();
    const std::string name = ts.expect_identifier();
    ts.expect_symbol(":");
    const Plot& from = find_plot(ts, s);
    ts.expect_symbol("->");
    const Plot& to = find_plot(ts, s);
    ts.expect_symbol("=");
    std::vector<Expr> h = parse_list(ts, from.dim());
    check_outputs(at, h.size(), to.dim(), "identification '" + name + "'");
    Domain hdom = parse_where(ts, from.dim());
    Identification id{name, from.name, to.name, SmoothMap(name, from.dim(), std::move(h), std::move(hdom)), {}};
    if (ts.accept_symbol(";")) {
      if (!ts.peek_identifier("inverse")) ts.fail("expected 'inverse'");
      ts.next();
      std::vector<Expr> g = parse_list(ts, to.dim());
      check_outputs(at, g.size(), from.dim(), "inverse of '" + name + "'");
      Domain gdom = parse_where(ts, to.dim());
      id.inverse = SmoothMap(name + "_inv", to.dim(), std::move(g), std::move(gdom));
    }
    s.add_identification(std::move(id));
  }

  std::string_view text_;
  Corpus corpus_;
  std::set<std::string> names_;
  std::optional<SpaceDecl> open_;
  int last_line_ = 0;
};

std::string print_map(const SmoothMap& f) {
  return "map " + f.name() + ": R" + std::to_string(f.arity_in()) + " -> R" + std::to_string(f.arity_out()) + " = " +
         print_list(f.outputs()) + print_where(f.domain());
}

std::string print_space(const SpaceDecl& d) {
  if (!d.user) {
    std::string out = "space " + d.name + " = " + d.builtin;
    if (d.squeeze) out += "(" + to_string(*d.squeeze) + ")";
    if (!d.int_args.empty()) {
      out += "(";
      for (std::size_t i = 0; i < d.int_args.size(); ++i) out += (i > 0 ? ", " : "") + std::to_string(d.int_args[i]);
      out += ")";
    }
    return out + "\n";
  }
  const DiffSpace& s = *d.user;
  std::ostringstream out;
  out << "space " << d.name << ": R" << s.ambient_dim() << "\n";
  for (const Constraint& c : s.constraints()) {
    const char* rel = c.kind == Constraint::Kind::Equal ? " = 0" : c.kind == Constraint::Kind::NonNegative ? " >= 0" : " > 0";
    out << "  constraint " << to_string(c.g) << rel << "\n";
  }
  if (s.rank_bound()) out << "  rank " << *s.rank_bound() << "\n";
  for (const Plot& p : s.plots()) {
    out << "  plot " << p.name << ": R" << p.dim() << " = " << print_list(p.map.outputs()) << print_where(p.map.domain())
        << "\n";
  }
  for (const Identification& id : s.identifications()) {
    out << "  ident " << id.name << ": " << id.from << " -> " << id.to << " = " << print_list(id.h.outputs())
        << print_where(id.h.domain());
    if (id.inverse) out << "; inverse " << print_list(id.inverse->outputs()) << print_where(id.inverse->domain());
    out << "\n";
  }
  for (const std::string& c : d.certificate_names) out << "  certificate " << c << "\n";
  if (!s.base_point().empty()) {
    out << "  base ";
    for (std::size_t i = 0; i < s.base_point().size(); ++i) out << (i > 0 ? ", " : "") << format_number(s.base_point()[i]);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

}  // namespace

DiffSpace SpaceDecl::build() const {
  if (user) return *user;
  SpaceParams p;
  if (builtin == "corner") {
    p.n = int_args.size() > 0 ? int_args[0] : 2;
    p.k = int_args.size() > 1 ? int_args[1] : 1;
  } else if (builtin == "pasta") {
    p.n = int_args.size() > 0 ? int_args[0] : 2;
    p.r = int_args.size() > 1 ? int_args[1] : 1;
  } else if (!int_args.empty()) {
    p.n = int_args[0];
  }
  p.f = squeeze;
  return builtin_space(builtin, p);
}

std::vector<SmoothMap> Corpus::polynomial_maps() const {
  std::vector<SmoothMap> out;
  for (const SmoothMap& f : maps) {
    if (f.is_polynomial()) out.push_back(f);
  }
  return out;
}

CartanCorpus Corpus::cartan() const {
  CartanCorpus out;
  out.fields = fields;
  for (const NamedForm& f : forms) out.forms.push_back(f.form);
  return out;
}

const SpaceDecl& Corpus::space(const std::string& name) const {
  for (const SpaceDecl& s : spaces) {
    if (s.name == name) return s;
  }
  throw UnknownSpace("no space named '" + name + "' in the corpus");
}

void Corpus::merge(Corpus other) {
  std::set<std::string> names;
  for (const auto& f : maps) names.insert(f.name());
  for (const auto& f : fields) names.insert(f.name());
  for (const auto& f : forms) names.insert(f.name);
  for (const auto& s : spaces) names.insert(s.name);
  const auto claim = [&](const std::string& n) {
    if (!names.insert(n).second) throw ParseError("duplicate name '" + n + "' across corpus files", 1, 1);
  };
  for (auto& f : other.maps) {
    claim(f.name());
    maps.push_back(std::move(f));
  }
  for (auto& f : other.fields) {
    claim(f.name());
    fields.push_back(std::move(f));
  }
  for (auto& f : other.forms) {
    claim(f.name);
    forms.push_back(std::move(f));
  }
  for (auto& s : other.spaces) {
    claim(s.name);
    spaces.push_back(std::move(s));
  }
}

Corpus parse_corpus(std::string_view text) { return Parser(text).run(); }

Corpus parse_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file '" + path + "'", 0, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

std::string print_corpus(const Corpus& corpus) {
  std::string out;
  for (const SmoothMap& f : corpus.maps) out += print_map(f) + "\n";
  for (const VectorField& v : corpus.fields) {
    out += "field " + v.name() + ": R" + std::to_string(v.dim()) + " = " + print_list(v.components()) +
           print_where(v.domain()) + "\n";
  }
  for (const NamedForm& f : corpus.forms) out += print_form(f) + "\n";
  for (const SpaceDecl& s : corpus.spaces) out += print_space(s);
  return out;
}

}  // namespace tanflow
