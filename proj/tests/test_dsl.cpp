#include <gtest/gtest.h>

#include "fluxcompose/dsl.hpp"
#include "support.hpp"

using namespace fluxcompose;

namespace {

const char* kFindResource =
    "fluent Profession/1, Specialization/1, availableRole/2, Name/1, CoachNum/1.\n"
    "action findResource(PR,SP) poss: knows_val(Profession(PR)), knows_val(Specialization(SP)), "
    "holds(availableRole(PR,SP)) update: add [know(Name(P)), know(CoachNum(CN))] remove [].";

// Line and column of the first occurrence of needle, counted by hand.
std::pair<std::size_t, std::size_t> positionOf(const std::string& text, const std::string& needle) {
  const auto at = text.find(needle);
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < at; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

TEST(ParseDomain, FindResourceAxiom) {
  const DomainFile d = parseDomain(kFindResource);
  ASSERT_EQ(d.actions.size(), 1u);
  const ActionSchema& a = d.actions[0];
  EXPECT_EQ(a.name, "findResource");
  EXPECT_EQ(a.params, (std::vector<std::string>{"PR", "SP"}));
  ASSERT_EQ(a.poss.size(), 3u);
  EXPECT_EQ(a.poss[0].str(), "knows_val(Profession(PR))");
  EXPECT_EQ(a.poss[2].str(), "holds(availableRole(PR,SP))");
  EXPECT_EQ(a.outputs(), (std::vector<std::string>{"P", "CN"}));
  EXPECT_TRUE(a.removes.empty());
}

TEST(ParseDomain, EmptySource) {
  const DomainFile d = parseDomain("");
  EXPECT_TRUE(d.fluentDecls.empty());
  EXPECT_TRUE(d.actions.empty());
  EXPECT_EQ(prettyPrint(d), "");
  EXPECT_EQ(parseDomain("  % only a comment\n\n"), d);
}

TEST(ParseDomain, UndeclaredFluentIsArityErrorAtToken) {
  const std::string src = "action f() poss: update: add [g(X)] remove [g(X)].";
  try {
    parseDomain(src);
    FAIL() << "expected ArityError";
  } catch (const ArityError& e) {
    const auto [line, col] = positionOf(src, "g(X)");
    EXPECT_EQ(e.line(), line);
    EXPECT_EQ(e.column(), col);
  }
}

TEST(ParseDomain, ArityMismatch) {
  EXPECT_THROW(parseDomain("fluent g/2.\naction f(X) poss: holds(g(X)) update: add [] remove []."), ArityError);
  EXPECT_THROW(parseDomain("fluent g/1.\naction f(X) poss: holds(g(X)) update: add [g(X,X)] remove []."),
               ArityError);
  EXPECT_THROW(parseDomain("fluent g/1.\naction f(X) poss: holds(g(X)) update: add [know(g(X),g(X))] remove []."),
               ParseError);
}

TEST(ParseDomain, PossKeywordInEitherCase) {
  const auto a = parseDomain("fluent g/1.\naction f(X) poss: holds(g(X)) update: add [] remove [].");
  const auto b = parseDomain("fluent g/1.\naction f(X) Poss: holds(g(X)) update: add [] remove [].");
  EXPECT_EQ(a, b);
}

TEST(ParseDomain, ZeroAryKnowledgeEffect) {
  const auto d = parseDomain("fluent ConfirmSend/0.\naction f() poss: update: add [know(ConfirmSend)] remove [].");
  EXPECT_EQ(d.actions[0].adds[0].str(), "know(ConfirmSend)");
  EXPECT_TRUE(d.actions[0].outputs().empty());
}

TEST(ParseDomain, SchemaDiscipline) {
  // Poss variables must be parameters.
  EXPECT_THROW(parseDomain("fluent g/1.\naction f() poss: holds(g(X)) update: add [] remove []."), SchemaError);
  // No unbound deletion.
  EXPECT_THROW(parseDomain("fluent g/1.\naction f() poss: update: add [] remove [g(X)]."), SchemaError);
  EXPECT_THROW(parseDomain("fluent g/1.\naction f(X,X) poss: holds(g(X)) update: add [] remove []."), SchemaError);
  EXPECT_THROW(parseDomain("fluent g/1.\naction f() poss: update: add [] remove [].\n"
                           "action f() poss: update: add [] remove []."),
               SchemaError);
  EXPECT_THROW(parseDomain("fluent g/1, g/1."), SchemaError);
}

TEST(ParseDomain, SyntaxErrorsReportExpectedAndFound) {
  try {
    parseDomain("fluent g/1.\naction f(X) poss holds(g(X)) update: add [] remove [].");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.expected(), "':'");
    EXPECT_NE(e.found().find("holds"), std::string::npos);
  }
  EXPECT_THROW(parseDomain("action f(x) poss: update: add [] remove []."), ParseError);
  EXPECT_THROW(parseDomain("fluent g/1"), ParseError);
}

TEST(ParseProblem, Examples) {
  const auto p = parseProblem("init: availableRole(doctor,orthopedics), know(Profession(doctor)). goal: know(ConfirmSend).");
  EXPECT_EQ(p.initial.size(), 2u);
  ASSERT_EQ(p.goal.size(), 1u);
  EXPECT_EQ(p.goal[0].str(), "know(ConfirmSend)");

  const auto empty = parseProblem("init: . goal: .");
  EXPECT_TRUE(empty.initial.empty());
  EXPECT_TRUE(empty.goal.empty());

  EXPECT_THROW(parseProblem("init: f(X). goal: f(X)."), GroundnessError);
}

TEST(ParseProblem, GoalMayHaveVariablesAndIsArityChecked) {
  const auto d = parseDomain("fluent g/1.");
  const auto p = parseProblem("init: g(a). goal: g(X).", &d);
  EXPECT_FALSE(p.goal[0].isGround());
  EXPECT_THROW(parseProblem("init: g(a,b). goal: .", &d), ArityError);
  EXPECT_THROW(parseProblem("init: h(a). goal: .", &d), ArityError);
}

TEST(ParseProblem, RoundTrip) {
  const auto p = parseProblem("init: b(x), know(a(y)), a(#ph). goal: know(a(Y)), b(x).");
  const auto q = parseProblem(prettyPrint(p));
  EXPECT_EQ(q.initial, p.initial);
  EXPECT_EQ(q.goal, p.goal);
}

TEST(SingleTerms, FluentAndAtom) {
  EXPECT_EQ(parseFluent("availableRole(PR,doctor)").str(), "availableRole(PR,doctor)");
  EXPECT_TRUE(parseFluent("availableRole(PR,doctor)").args()[0].isVariable());
  EXPECT_TRUE(parseFluent("g(#out_a_X_1)").args()[0].isPlaceholder());
  EXPECT_EQ(parsePossAtom("knows_val(Name(P))").kind, PossAtom::Kind::KnowsVal);
  EXPECT_THROW(parseFluent("g(a"), ParseError);
  EXPECT_THROW(parseFluent("g(a) x"), ParseError);
}

TEST(PrettyPrint, BundledDomainRoundTripsAndIsStable) {
  const std::string src = testsupport::readFile(testsupport::dataPath("emergency.fcd"));
  const DomainFile d = parseDomain(src, "emergency.fcd");
  const std::string once = prettyPrint(d);
  const DomainFile back = parseDomain(once);
  EXPECT_EQ(back, d);
  EXPECT_EQ(prettyPrint(back), once);
}

TEST(PrettyPrint, GeneratedDomainsRoundTrip) {
  testsupport::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const auto r = testsupport::randomDomain(rng);
    const std::string text = prettyPrint(r.domain);
    DomainFile back;
    ASSERT_NO_THROW(back = parseDomain(text)) << text;
    ASSERT_EQ(back, r.domain) << text;
  }
}

TEST(ParserProperty, TotalOnArbitraryInputWithPositionsInBounds) {
  testsupport::Rng rng(22);
  static const std::vector<std::string> pieces = {"fluent", "action", "poss", "Poss", "update", "add", "remove",
                                                  "holds", "knows_val", "know", "(", ")", "[", "]", ",", ".",
                                                  ":", "/", "1", "g", "X", "#", "#p", "%c\n", "\n", " ", "\xC3\xA9",
                                                  "init", "goal", "@", "\t"};
  auto checkBounds = [](const std::string& src, const Error& e) {
    if (!e.hasPosition()) return;
    std::vector<std::size_t> lineLengths{0};
    for (unsigned char ch : src) {
      if (ch == '\n') lineLengths.push_back(0);
      else if ((ch & 0xC0) != 0x80) ++lineLengths.back();
    }
    ASSERT_GE(e.line(), 1u);
    ASSERT_LE(e.line(), lineLengths.size()) << src;
    ASSERT_GE(e.column(), 1u);
    ASSERT_LE(e.column(), lineLengths[e.line() - 1] + 1) << src;
  };
  for (int i = 0; i < 3000; ++i) {
    std::string src;
    const int n = rng.uniform(0, 30);
    for (int k = 0; k < n; ++k) {
      if (rng.coin(0.1)) src += static_cast<char>(rng.uniform(1, 255));
      else src += rng.pick(pieces);
    }
    try {
      parseDomain(src);
    } catch (const Error& e) {
      checkBounds(src, e);
    }
    try {
      parseProblem(src);
    } catch (const Error& e) {
      checkBounds(src, e);
    }
  }
}
