#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "tanflow/corpus.hpp"
#include "tanflow/errors.hpp"

using namespace tanflow;

namespace {

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class E>
E parse_error(std::string_view text) {
  try {
    (void)parse_corpus(text);
  } catch (const E& e) {
    return e;
  }
  ADD_FAILURE() << "no error for: " << text;
  return E("", 0, 0);
}

}  // namespace

TEST(Corpus, MapWithoutKeyword) {
  const Corpus c = parse_corpus("f: R2->R1 = x1*x2");
  ASSERT_EQ(c.maps.size(), 1u);
  EXPECT_EQ(c.maps[0].arity_in(), 2);
  EXPECT_EQ(c.maps[0].arity_out(), 1);
  const Vec x{3.0, -2.0};
  EXPECT_DOUBLE_EQ(c.maps[0](x)[0], -6.0);
  EXPECT_EQ(print_corpus(c), "map f: R2 -> R1 = x1*x2\n");
}

TEST(Corpus, MalformedReportsOffendingToken) {
  const ParseError e = parse_error<ParseError>("f: = +");
  EXPECT_EQ(e.line(), 1);
  EXPECT_EQ(e.column(), 6);
  EXPECT_NE(std::string(e.what()).find("'+'"), std::string::npos);
}

TEST(Corpus, EmptyTextIsAParseError) {
  (void)parse_error<ParseError>("");
  (void)parse_error<ParseError>("# only a comment\n\n");
}

TEST(Corpus, ErrorKinds) {
  const auto undefined = parse_error<UndefinedVariable>("map g: R2 -> R1 = x3");
  EXPECT_EQ(undefined.column(), 19);
  (void)parse_error<ArityMismatch>("map g: R2 -> R1 = x1, x2");
  (void)parse_error<ArityMismatch>("field v: R3 = x1, x2");
  (void)parse_error<ArityMismatch>("form a: R2 deg 2 = (x1) dx1");
  (void)parse_error<UndefinedVariable>("form a: R2 deg 1 = (x1) dx3");
  const auto dup = parse_error<ParseError>("map g: R1 -> R1 = x1\nfield g: R1 = 1");
  EXPECT_EQ(dup.line(), 2);
  (void)parse_error<ParseError>("space s = klein_bottle");
  (void)parse_error<ParseError>("space s: R1\n  plot p: R1 = x1\n");
  (void)parse_error<ParseError>("space s: R1\n  plot p: R1 = x1\n  ident h: p -> q = x1\nend");
  (void)parse_error<ParseError>("map g: R1 -> R1 = x1 junk");
}

TEST(Corpus, DomainsAndForms) {
  const Corpus c = parse_corpus(
      "field v: R2 = log(x1), x2 where x1 > 0, x2 < 3, 1-x1^2 > 0\n"
      "form a: R3 deg 2 = (x1) dx1^dx3 + (x2) dx2^dx3\n"
      "form z: R2 deg 1 = 0\n");
  const Domain& d = c.fields[0].domain();
  EXPECT_EQ(d.box()[0].lo, 0.0);
  EXPECT_EQ(d.box()[1].hi, 3.0);
  ASSERT_EQ(d.predicates().size(), 1u);
  EXPECT_TRUE(d.contains(Vec{0.5, 0.0}));
  EXPECT_FALSE(d.contains(Vec{1.5, 0.0}));
  EXPECT_EQ(c.forms[0].form.degree(), 2);
  EXPECT_EQ(c.forms[0].form.coefficients().size(), 2u);
  EXPECT_TRUE(c.forms[1].form.is_exactly_zero());
  EXPECT_EQ(print_corpus(parse_corpus(print_corpus(c))), print_corpus(c));
}

TEST(Corpus, UserSpaceMatchesItsDeclaration) {
  const Corpus c = parse_corpus(
      "space m: R1\n"
      "  plot line: R1 = x1^2\n"
      "  ident flip: line -> line = -x1; inverse -x1\n"
      "  certificate fiberwise_sum\n"
      "end\n");
  const DiffSpace s = c.space("m").build();
  s.validate();
  ASSERT_EQ(s.identifications().size(), 1u);
  EXPECT_TRUE(s.identifications()[0].inverse.has_value());
  const TangentRep a{"line", {0.0}, {{1.0}}};
  const TangentRep b{"line", {0.0}, {{-1.0}}};
  EXPECT_EQ(equivalent_tangent(s, a, b).verdict, EquivalenceResult::Verdict::Equivalent);
  EXPECT_THROW((void)c.space("absent"), UnknownSpace);
}

TEST(Corpus, ShippedDefaultRoundTripsByteForByte) {
  const std::string text = read_file(TANFLOW_DEFAULT_CORPUS);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(print_corpus(parse_corpus(text)), text);
}

TEST(Corpus, ShippedDefaultCoversTheSuites) {
  const Corpus c = parse_corpus(read_file(TANFLOW_DEFAULT_CORPUS));
  EXPECT_GE(c.polynomial_maps().size(), 5u);
  EXPECT_GT(c.maps.size(), c.polynomial_maps().size());

  int pairs = 0;
  std::set<int> dims;
  for (std::size_t i = 0; i < c.fields.size(); ++i) {
    dims.insert(c.fields[i].dim());
    for (std::size_t j = i + 1; j < c.fields.size(); ++j) pairs += c.fields[i].dim() == c.fields[j].dim();
  }
  EXPECT_GE(pairs, 10);
  EXPECT_EQ(dims, (std::set<int>{1, 2, 3}));

  std::set<std::pair<int, int>> forms;
  for (const NamedForm& f : c.forms) forms.insert({f.form.dim(), f.form.degree()});
  for (int k = 0; k <= 2; ++k) EXPECT_TRUE(forms.contains({2, k}));
  for (int k = 0; k <= 3; ++k) EXPECT_TRUE(forms.contains({3, k}));

  for (const SpaceDecl& s : c.spaces) EXPECT_NO_THROW(s.build().validate()) << s.name;
}

TEST(Corpus, MergeRejectsDuplicateNames) {
  Corpus a = parse_corpus("map f: R1 -> R1 = x1");
  EXPECT_THROW(a.merge(parse_corpus("field f: R1 = 1")), ParseError);
  a.merge(parse_corpus("field g: R1 = 1"));
  EXPECT_EQ(a.fields.size(), 1u);
}
