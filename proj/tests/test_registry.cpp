#include <gtest/gtest.h>

#include "fluxcompose/dsl.hpp"
#include "fluxcompose/registry.hpp"
#include "support.hpp"

using namespace fluxcompose;

namespace {

TaxonomyGraph tax() { return loadTaxonomy(testsupport::readFile(testsupport::dataPath("emergency.tax"))); }
Registry bundled(const TaxonomyGraph& g) {
  return loadRegistry(testsupport::readFile(testsupport::dataPath("emergency.reg")), g);
}

// Degree from raw edges by DFS, independent of the taxonomy closure.
MatchDegree oracleDegree(const TaxonomyGraph& g, const std::string& adv, const std::string& req) {
  std::multimap<std::string, std::string> parents;
  for (const auto& [c, p] : g.edges()) parents.emplace(c, p);
  if (adv == req) return MatchDegree::Exact;
  if (testsupport::reachable(parents, adv, req)) return MatchDegree::Plugin;
  if (testsupport::reachable(parents, req, adv)) return MatchDegree::Subsumes;
  return MatchDegree::Fail;
}

std::vector<std::pair<std::string, MatchDegree>> oracleCandidates(const Registry& reg, const TaxonomyGraph& g,
                                                                  const std::vector<std::string>& req) {
  std::vector<std::pair<std::string, MatchDegree>> out;
  for (const auto& [name, svc] : reg.services()) {
    std::vector<std::string> adv;
    for (const auto& o : svc.outputs) adv.push_back(o.type);
    for (const auto& t : svc.extraAdds) {
      if (t.name() == "know" && g.contains(t.args()[0].name())) adv.push_back(t.args()[0].name());
    }
    int worst = 3;
    for (const auto& r : req) {
      int best = 0;
      for (const auto& a : adv) best = std::max(best, static_cast<int>(oracleDegree(g, a, r)));
      worst = std::min(worst, best);
    }
    if (worst >= 1) out.emplace_back(name, static_cast<MatchDegree>(worst));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::string, MatchDegree>> flatten(const std::vector<Candidate>& cs) {
  std::vector<std::pair<std::string, MatchDegree>> out;
  for (const auto& c : cs) out.emplace_back(c.service.name, c.degree);
  return out;
}

}  // namespace

TEST(LoadRegistry, BundledServices) {
  const auto g = tax();
  const auto reg = bundled(g);
  ASSERT_EQ(reg.size(), 2u);
  const auto* fr = reg.find("findResource");
  ASSERT_NE(fr, nullptr);
  ASSERT_EQ(fr->inputs.size(), 2u);
  EXPECT_EQ(fr->inputs[0].type, "Profession");
  EXPECT_EQ(fr->inputs[1].type, "Specialization");
  EXPECT_EQ(fr->outputs[0].type, "Name");
  EXPECT_EQ(fr->outputs[1].type, "Coach");
  EXPECT_EQ(fr->groundingStubId, "findResourceStub");
  EXPECT_EQ(fr->textDescription, "returns name and position of the resource");
}

TEST(LoadRegistry, EmptyAndDuplicates) {
  const auto g = tax();
  EXPECT_TRUE(loadRegistry("", g).empty());
  const std::string one = "service findResource\n  grounding: s\nend\n";
  EXPECT_THROW(loadRegistry(one + one, g), DuplicateServiceError);
}

TEST(LoadRegistry, ErrorsCarryLines) {
  const auto g = tax();
  try {
    loadRegistry("service s\n  hasInput: X Nope\n  grounding: s\nend\n", g);
    FAIL();
  } catch (const UnknownConceptError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(loadRegistry("service s\n  grounding: s\n", g), RegistryParseError);
  EXPECT_THROW(loadRegistry("service s\n  hasOutput: P Name\n  hasInput: X Name\n  grounding: s\nend\n", g),
               RegistryParseError);
  EXPECT_THROW(loadRegistry("service s\n  hasInput: X Name\n  hasInput: X Coach\n  grounding: s\nend\n", g), Error);
  try {
    loadRegistry("service s\n  pre: holds(g(\n  grounding: s\nend\n", g);
    FAIL();
  } catch (const RegistryParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Compile, FindResourceMatchesHandWrittenAxiom) {
  const auto g = tax();
  const auto reg = bundled(g);
  const DomainFile expected = parseDomain(
      "fluent Profession/1, Specialization/1, availableRole/2, Name/1, CoachNum/1, availableAt/2.\n"
      "action findResource(PR,SP) poss: knows_val(Profession(PR)), knows_val(Specialization(SP)), "
      "holds(availableRole(PR,SP)) update: add [know(Name(P)), know(CoachNum(CN)), availableAt(P,CN)] remove [].");
  EXPECT_EQ(compileServiceToAction(*reg.find("findResource")), expected.actions[0]);
}

TEST(Compile, NotifyResourceMatchesHandWrittenAxiom) {
  const auto g = tax();
  const auto reg = bundled(g);
  const DomainFile expected = parseDomain(
      "fluent Name/1, CoachNum/1, Message/1, availableAt/2, SendMsg/3, ConfirmSend/0.\n"
      "action notifyResource(P,CN,MSG) Poss: knows_val(Name(P)), knows_val(CoachNum(CN)), knows_val(Message(MSG)), "
      "holds(availableAt(P,CN)) update: add [SendMsg(P,CN,MSG), know(ConfirmSend)] remove [].");
  EXPECT_EQ(compileServiceToAction(*reg.find("notifyResource")), expected.actions[0]);
}

TEST(Compile, CompiledRegistryEqualsBundledDomain) {
  const auto g = tax();
  const auto reg = bundled(g);
  const auto d = parseDomain(testsupport::readFile(testsupport::dataPath("emergency.fcd")));
  EXPECT_EQ(reg.actions(), d.actions);
}

TEST(Compile, EmptyService) {
  ServiceDescription s;
  s.name = "noop";
  const auto a = compileServiceToAction(s);
  EXPECT_TRUE(a.params.empty());
  EXPECT_TRUE(a.poss.empty());
  EXPECT_TRUE(a.adds.empty());
  EXPECT_TRUE(a.removes.empty());
}

TEST(Compile, OutputsAreExactlyDeclaredOutputsAndSchemasAreDistinct) {
  const auto g = tax();
  const auto reg = bundled(g);
  std::set<std::string> rendered;
  for (const auto& [name, svc] : reg.services()) {
    const auto a = compileServiceToAction(svc);
    std::vector<std::string> declared;
    for (const auto& o : svc.outputs) declared.push_back(o.name);
    EXPECT_EQ(a.outputs(), declared) << name;
    rendered.insert(prettyPrint(a));
  }
  EXPECT_EQ(rendered.size(), reg.size());
}

TEST(FindCandidates, Examples) {
  const auto g = tax();
  const auto reg = bundled(g);
  auto nameCoach = findCandidates(reg, {"Name", "Coach"}, g);
  ASSERT_EQ(nameCoach.size(), 1u);
  EXPECT_EQ(nameCoach[0].service.name, "findResource");
  EXPECT_EQ(nameCoach[0].degree, MatchDegree::Exact);

  auto all = findCandidates(reg, {}, g);
  ASSERT_EQ(all.size(), 2u);
  for (const auto& c : all) EXPECT_EQ(c.degree, MatchDegree::Exact);

  auto confirm = findCandidates(reg, {"ConfirmSend"}, g);
  ASSERT_EQ(confirm.size(), 1u);
  EXPECT_EQ(confirm[0].service.name, "notifyResource");
  EXPECT_EQ(confirm[0].degree, MatchDegree::Exact);

  EXPECT_THROW(findCandidates(reg, {"Nope"}, g), UnknownConceptError);
}

TEST(FindCandidates, AgreesWithBruteForceOnEveryRequestPair) {
  const auto g = tax();
  // A wider registry so Plugin and Subsumes degrees occur.
  const auto reg = loadRegistry(testsupport::readFile(testsupport::dataPath("emergency.reg")) +
                                    "service classify\n  hasInput: N Name\n  hasOutput: S Orthopedics\n"
                                    "  grounding: c\nend\n"
                                    "service broad\n  hasOutput: E Event\n  grounding: b\nend\n"
                                    "service medical\n  hasOutput: M Medical\n  hasOutput: N Name\n"
                                    "  grounding: m\nend\n",
                                g);
  const std::vector<std::string> concepts(g.concepts().begin(), g.concepts().end());
  for (const auto& a : concepts) {
    for (const auto& b : concepts) {
      const std::vector<std::string> req{a, b};
      EXPECT_EQ(flatten(findCandidates(reg, req, g)), oracleCandidates(reg, g, req)) << a << "," << b;
    }
  }
}

TEST(FindCandidates, DeterministicAcrossRuns) {
  const auto g = tax();
  const auto reg = bundled(g);
  EXPECT_EQ(flatten(findCandidates(reg, {"Name"}, g)), flatten(findCandidates(reg, {"Name"}, g)));
}

TEST(PrettyPrint, RegistryRoundTrip) {
  const auto g = tax();
  const auto reg = bundled(g);
  const auto back = loadRegistry(prettyPrint(reg), g);
  EXPECT_EQ(back.services(), reg.services());
  EXPECT_EQ(prettyPrint(back), prettyPrint(reg));
}
