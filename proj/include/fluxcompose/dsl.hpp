#pragma once
#ifndef FLUXCOMPOSE_DSL_HPP
#define FLUXCOMPOSE_DSL_HPP

// Textual domain (.fcd) and problem (.fcp) language.
//
//   % comment to end of line
//   fluent availableRole/2, Name/1.
//   action findResource(PR,SP)
//     poss: knows_val(Profession(PR)), holds(availableRole(PR,SP))
//     update: add [know(Name(P))] remove [].
//
//   init: availableRole(doctor,orthopedics), know(Profession(doctor)).
//   goal: know(ConfirmSend).
//
// In fluent position (the argument of holds/knows_val/know and list or
// init/goal items) an identifier is a fluent symbol whatever its case.
// In argument position an identifier starting with an uppercase letter or
// '_' is a variable; anything else (including '#placeholders') a constant.

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxcompose/error.hpp"
#include "fluxcompose/term.hpp"

namespace fluxcompose {

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string expected, std::string found)
      : Error("expected " + expected + ", found " + found, line, column),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  const std::string& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::string expected_;
  std::string found_;
};

/// Undeclared fluent symbol or arity mismatch.
class ArityError : public Error {
 public:
  using Error::Error;
};

/// Variables in a problem's initial state.
class GroundnessError : public Error {
 public:
  using Error::Error;
};

/// A poss or remove variable that is not an action parameter, or a
/// duplicated action/declaration.
class SchemaError : public Error {
 public:
  using Error::Error;
};

struct PossAtom {
  enum class Kind { Holds, KnowsVal };
  Kind kind = Kind::Holds;
  Term pattern;

  static PossAtom holdsAtom(Term t) { return {Kind::Holds, std::move(t)}; }
  static PossAtom knowsValAtom(Term t) { return {Kind::KnowsVal, std::move(t)}; }

  std::string str() const { return (kind == Kind::Holds ? "holds(" : "knows_val(") + pattern.str() + ")"; }

  friend bool operator==(const PossAtom&, const PossAtom&) = default;
  friend auto operator<=>(const PossAtom& a, const PossAtom& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    return a.pattern <=> b.pattern;
  }
};

struct ActionSchema {
  std::string name;
  std::vector<std::string> params;
  std::vector<PossAtom> poss;
  std::vector<Term> adds;
  std::vector<Term> removes;

  /// Variables of the add list that no parameter binds, in first-occurrence
  /// order. They receive placeholders when the action is planned.
  std::vector<std::string> outputs() const {
    std::vector<std::string> vars;
    for (const auto& a : adds) a.collectVariables(vars);
    std::vector<std::string> out;
    for (const auto& v : vars) {
      if (std::find(params.begin(), params.end(), v) == params.end()) out.push_back(v);
    }
    return out;
  }

  std::string head() const {
    std::string out = name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) out += ",";
      out += params[i];
    }
    return out + ")";
  }

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct FluentDecl {
  std::string name;
  std::size_t arity = 0;
  friend bool operator==(const FluentDecl&, const FluentDecl&) = default;
};

struct DomainFile {
  std::vector<FluentDecl> fluentDecls;
  std::vector<ActionSchema> actions;
  std::string sourceName;

  const ActionSchema* findAction(const std::string& name) const {
    for (const auto& a : actions) {
      if (a.name == name) return &a;
    }
    return nullptr;
  }

  /// Structural equality; the source name is not part of the value.
  friend bool operator==(const DomainFile& a, const DomainFile& b) {
    return a.fluentDecls == b.fluentDecls && a.actions == b.actions;
  }
};

struct ProblemFile {
  State initial;
  std::vector<Term> goal;
};

/// Checks the parameter discipline of a schema: poss and remove variables
/// must be parameters, parameters are distinct. Throws SchemaError.
inline void checkSchema(const ActionSchema& a, std::size_t line = 0, std::size_t column = 0) {
  std::set<std::string> params;
  for (const auto& p : a.params) {
    if (!params.insert(p).second) throw SchemaError("duplicate parameter " + p + " in action " + a.name, line, column);
  }
  for (const auto& atom : a.poss) {
    for (const auto& v : atom.pattern.variables()) {
      if (!params.count(v)) {
        throw SchemaError("variable " + v + " in precondition of " + a.name + " is not a parameter", line, column);
      }
    }
  }
  for (const auto& r : a.removes) {
    for (const auto& v : r.variables()) {
      if (!params.count(v)) {
        throw SchemaError("variable " + v + " in remove list of " + a.name + " is unbound", line, column);
      }
    }
  }
}

namespace detail {

struct Token {
  enum class Type { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Dot, Colon, Slash, End, Invalid };
  Type type = Type::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::string describeToken(const Token& t) {
  switch (t.type) {
    case Token::Type::End: return "end of input";
    case Token::Type::Ident: return "'" + t.text + "'";
    case Token::Type::Number: return "number " + t.text;
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipSpaceAndComments();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        t.type = Token::Type::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (isIdentStart(c)) {
        t.type = Token::Type::Ident;
        t.text.push_back(c);
        advance();
        while (pos_ < src_.size() && isIdentChar(src_[pos_])) {
          t.text.push_back(src_[pos_]);
          advance();
        }
        if (t.text == "#") t.type = Token::Type::Invalid;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.type = Token::Type::Number;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text.push_back(src_[pos_]);
          advance();
        }
      } else {
        t.text = std::string(1, c);
        switch (c) {
          case '(': t.type = Token::Type::LParen; break;
          case ')': t.type = Token::Type::RParen; break;
          case '[': t.type = Token::Type::LBracket; break;
          case ']': t.type = Token::Type::RBracket; break;
          case ',': t.type = Token::Type::Comma; break;
          case '.': t.type = Token::Type::Dot; break;
          case ':': t.type = Token::Type::Colon; break;
          case '/': t.type = Token::Type::Slash; break;
          default: t.type = Token::Type::Invalid; break;
        }
        advance();
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static bool isIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '#'; }
  static bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  void advance() {
    // Columns count bytes; UTF-8 continuation bytes do not start a column.
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++column_;
    }
    ++pos_;
  }

  void skipSpaceAndComments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct FluentUse {
  Term fluent;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

  DomainFile domain() {
    DomainFile d;
    std::map<std::string, std::size_t> declared;
    std::vector<std::pair<const Token*, std::size_t>> actionHeads;
    while (!at(Token::Type::End)) {
      const Token& kw = peek();
      if (isKeyword(kw, "fluent")) {
        next();
        for (;;) {
          const Token& nameTok = expectIdent("fluent name");
          expect(Token::Type::Slash, "'/'");
          const Token& arityTok = expect(Token::Type::Number, "arity");
          std::size_t arity = 0;
          try {
            arity = std::stoul(arityTok.text);
          } catch (...) {
            throw ParseError(arityTok.line, arityTok.column, "arity", describeToken(arityTok));
          }
          if (nameTok.text == "know" || nameTok.text.front() == '#') {
            throw ArityError("'" + nameTok.text + "' cannot be declared as a fluent", nameTok.line, nameTok.column);
          }
          auto [it, fresh] = declared.emplace(nameTok.text, arity);
          if (!fresh) {
            throw SchemaError("fluent " + nameTok.text + " declared twice", nameTok.line, nameTok.column);
          }
          d.fluentDecls.push_back({nameTok.text, arity});
          if (!accept(Token::Type::Comma)) break;
        }
        expect(Token::Type::Dot, "'.'");
      } else if (isKeyword(kw, "action")) {
        const Token* head = &next();
        d.actions.push_back(action());
        actionHeads.emplace_back(head, d.actions.size() - 1);
      } else {
        throw ParseError(kw.line, kw.column, "'fluent' or 'action'", describeToken(kw));
      }
    }
    std::set<std::string> names;
    for (const auto& [tok, idx] : actionHeads) {
      const auto& a = d.actions[idx];
      if (!names.insert(a.name).second) {
        throw SchemaError("action " + a.name + " defined twice", tok->line, tok->column);
      }
    }
    checkArities(declared);
    for (const auto& [tok, idx] : actionHeads) checkSchema(d.actions[idx], tok->line, tok->column);
    return d;
  }

  ProblemFile problem(const std::map<std::string, std::size_t>* declared) {
    ProblemFile p;
    expectKeyword("init");
    expect(Token::Type::Colon, "':'");
    for (const auto& [f, line, col] : fluentListUntilDot()) {
      if (!f.isGround()) throw GroundnessError("initial fluent " + f.str() + " contains variables", line, col);
      p.initial.insert(f);
    }
    expectKeyword("goal");
    expect(Token::Type::Colon, "':'");
    for (const auto& use : fluentListUntilDot()) p.goal.push_back(use.fluent);
    const Token& end = peek();
    if (!at(Token::Type::End)) throw ParseError(end.line, end.column, "end of input", describeToken(end));
    if (declared) checkArities(*declared);
    return p;
  }

  Term singleFluent() {
    Term t = fluent();
    expectEnd();
    return t;
  }

  PossAtom singleAtom() {
    PossAtom a = possAtom();
    expectEnd();
    return a;
  }

 private:
  ActionSchema action() {
    ActionSchema a;
    a.name = expectIdent("action name").text;
    expect(Token::Type::LParen, "'('");
    if (!accept(Token::Type::RParen)) {
      for (;;) {
        const Token& v = expectIdent("parameter");
        if (!startsVariable(v.text)) throw ParseError(v.line, v.column, "variable parameter", describeToken(v));
        a.params.push_back(v.text);
        if (accept(Token::Type::RParen)) break;
        expect(Token::Type::Comma, "',' or ')'");
      }
    }
    const Token& possTok = peek();
    if (!isKeyword(possTok, "poss") && !isKeyword(possTok, "Poss")) {
      throw ParseError(possTok.line, possTok.column, "'poss'", describeToken(possTok));
    }
    next();
    expect(Token::Type::Colon, "':'");
    if (!isKeyword(peek(), "update")) {
      for (;;) {
        a.poss.push_back(possAtom());
        if (!accept(Token::Type::Comma)) break;
      }
    }
    expectKeyword("update");
    expect(Token::Type::Colon, "':'");
    expectKeyword("add");
    a.adds = bracketList();
    expectKeyword("remove");
    a.removes = bracketList();
    expect(Token::Type::Dot, "'.'");
    return a;
  }

  PossAtom possAtom() {
    const Token& kw = peek();
    PossAtom::Kind kind;
    if (isKeyword(kw, "holds")) {
      kind = PossAtom::Kind::Holds;
    } else if (isKeyword(kw, "knows_val")) {
      kind = PossAtom::Kind::KnowsVal;
    } else {
      throw ParseError(kw.line, kw.column, "'holds' or 'knows_val'", describeToken(kw));
    }
    next();
    expect(Token::Type::LParen, "'('");
    Term t = fluent();
    expect(Token::Type::RParen, "')'");
    return {kind, std::move(t)};
  }

  std::vector<Term> bracketList() {
    std::vector<Term> out;
    expect(Token::Type::LBracket, "'['");
    if (accept(Token::Type::RBracket)) return out;
    for (;;) {
      out.push_back(fluent());
      if (accept(Token::Type::RBracket)) return out;
      expect(Token::Type::Comma, "',' or ']'");
    }
  }

  std::vector<FluentUse> fluentListUntilDot() {
    std::vector<FluentUse> out;
    if (accept(Token::Type::Dot)) return out;
    for (;;) {
      const Token& start = peek();
      out.push_back({fluent(), start.line, start.column});
      if (accept(Token::Type::Dot)) return out;
      expect(Token::Type::Comma, "',' or '.'");
    }
  }

  Term fluent() {
    const Token& name = expectIdent("fluent");
    if (name.text.front() == '#') throw ParseError(name.line, name.column, "fluent symbol", describeToken(name));
    std::vector<Term> args;
    if (accept(Token::Type::LParen)) {
      if (name.text == "know") {
        args.push_back(fluent());
        expect(Token::Type::RParen, "')'");
      } else {
        args = argList();
      }
    }
    Term t = Term::compound(name.text, std::move(args));
    uses_.push_back({t, name.line, name.column});
    return t;
  }

  std::vector<Term> argList() {
    std::vector<Term> args;
    if (accept(Token::Type::RParen)) return args;
    for (;;) {
      args.push_back(argument());
      if (accept(Token::Type::RParen)) return args;
      expect(Token::Type::Comma, "',' or ')'");
    }
  }

  Term argument() {
    const Token& id = expectIdent("term");
    if (accept(Token::Type::LParen)) {
      if (id.text.front() == '#') throw ParseError(id.line, id.column, "functor", describeToken(id));
      return Term::compound(id.text, argList());
    }
    if (startsVariable(id.text)) return Term::variable(id.text);
    return Term::constant(id.text);
  }

  void checkArities(const std::map<std::string, std::size_t>& declared) const {
    for (const auto& use : uses_) {
      const Term& f = use.fluent;
      if (f.name() == "know") {
        if (f.arity() != 1) throw ArityError("know/1 used with arity " + std::to_string(f.arity()), use.line, use.column);
        continue;
      }
      auto it = declared.find(f.name());
      if (it == declared.end()) {
        throw ArityError("undeclared fluent " + f.name() + "/" + std::to_string(f.arity()), use.line, use.column);
      }
      if (it->second != f.arity()) {
        throw ArityError("fluent " + f.name() + " declared with arity " + std::to_string(it->second) + " but used with " +
                             std::to_string(f.arity()),
                         use.line, use.column);
      }
    }
  }

  static bool startsVariable(const std::string& s) {
    return !s.empty() && (std::isupper(static_cast<unsigned char>(s.front())) || s.front() == '_');
  }
  static bool isKeyword(const Token& t, std::string_view kw) { return t.type == Token::Type::Ident && t.text == kw; }

  const Token& peek() const { return tokens_[pos_]; }
  bool at(Token::Type type) const { return peek().type == type; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.type != Token::Type::End) ++pos_;
    return t;
  }
  bool accept(Token::Type type) {
    if (!at(type)) return false;
    next();
    return true;
  }
  const Token& expect(Token::Type type, const std::string& what) {
    const Token& t = peek();
    if (t.type != type) throw ParseError(t.line, t.column, what, describeToken(t));
    return next();
  }
  const Token& expectIdent(const std::string& what) { return expect(Token::Type::Ident, what); }
  void expectKeyword(std::string_view kw) {
    const Token& t = peek();
    if (!isKeyword(t, kw)) throw ParseError(t.line, t.column, "'" + std::string(kw) + "'", describeToken(t));
    next();
  }
  void expectEnd() {
    const Token& t = peek();
    if (!at(Token::Type::End)) throw ParseError(t.line, t.column, "end of input", describeToken(t));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<FluentUse> uses_;
};

inline std::map<std::string, std::size_t> declarationMap(const DomainFile& d) {
  std::map<std::string, std::size_t> out;
  for (const auto& f : d.fluentDecls) out.emplace(f.name, f.arity);
  return out;
}

}  // namespace detail

/// Throws ParseError, ArityError or SchemaError.
inline DomainFile parseDomain(std::string_view source, std::string sourceName = "<input>") {
  DomainFile d = detail::Parser(source).domain();
  d.sourceName = std::move(sourceName);
  return d;
}

/// When a domain is given, init/goal fluents are arity-checked against its
/// declarations. Throws ParseError, GroundnessError or ArityError.
inline ProblemFile parseProblem(std::string_view source, const DomainFile* domain = nullptr) {
  if (domain) {
    auto declared = detail::declarationMap(*domain);
    return detail::Parser(source).problem(&declared);
  }
  return detail::Parser(source).problem(nullptr);
}

/// A single fluent pattern, e.g. "availableRole(PR,SP)".
inline Term parseFluent(std::string_view text) { return detail::Parser(text).singleFluent(); }

/// A single precondition atom, e.g. "holds(availableAt(P,CN))".
inline PossAtom parsePossAtom(std::string_view text) { return detail::Parser(text).singleAtom(); }

namespace detail {

inline std::string joinTerms(const std::vector<Term>& ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ", ";
    out += ts[i].str();
  }
  return out;
}

}  // namespace detail

inline std::string prettyPrint(const ActionSchema& a) {
  std::string out = "action " + a.head() + "\n  poss:";
  for (std::size_t i = 0; i < a.poss.size(); ++i) out += (i ? ", " : " ") + a.poss[i].str();
  out += "\n  update: add [" + detail::joinTerms(a.adds) + "] remove [" + detail::joinTerms(a.removes) + "].\n";
  return out;
}

inline std::string prettyPrint(const DomainFile& d) {
  std::string out;
  for (const auto& f : d.fluentDecls) out += "fluent " + f.name + "/" + std::to_string(f.arity) + ".\n";
  for (const auto& a : d.actions) {
    if (!out.empty()) out += "\n";
    out += prettyPrint(a);
  }
  return out;
}

inline std::string prettyPrint(const ProblemFile& p) {
  std::string out = "init:";
  const auto fluents = p.initial.fluents();
  for (std::size_t i = 0; i < fluents.size(); ++i) out += (i ? ", " : " ") + fluents[i].str();
  out += ".\ngoal:";
  for (std::size_t i = 0; i < p.goal.size(); ++i) out += (i ? ", " : " ") + p.goal[i].str();
  return out + ".\n";
}

}  // namespace fluxcompose

#endif
