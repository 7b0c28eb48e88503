#include "vnlcm/parser.hpp"

#include <cctype>
#include <charconv>
#include <unordered_set>
#include <vector>

namespace vnlcm {

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Global, Local, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int column = 1;
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (c == '@' || c == '%') {
        advance();
        std::string id = read_ident();
        if (id.empty()) throw ParseError(std::string("expected identifier after '") + c + "'", t.line, t.column);
        t.kind = c == '@' ? Tok::Global : Tok::Local;
        t.text = std::move(id);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        std::size_t start = pos_;
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
          throw ParseError("integer literal out of range: " + t.text, t.line, t.column);
      } else if (is_ident_char(c)) {
        t.kind = Tok::Ident;
        t.text = read_ident();
      } else if (std::string_view("(){}[],:=").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct LabelRef {
  std::string label;
  int line;
  int column;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Module parse() {
    Module m;
    std::unordered_set<std::string> names;
    if (peek().kind == Tok::End) error("expected at least one function");
    while (peek().kind != Tok::End) {
      const Token& start = peek();
      Function f = parse_function();
      if (!names.insert(f.name).second) throw ParseError("duplicate function @" + f.name, start.line, start.column);
      m.functions.push_back(std::move(f));
    }
    return m;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? std::string("end of input") : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.line, t.column);
  }

  bool at_punct(char c) const { return peek().kind == Tok::Punct && peek().text[0] == c; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

  void expect_punct(char c) {
    if (!at_punct(c)) error(std::string("expected '") + c + "'");
    next();
  }

  void expect_word(std::string_view w) {
    if (!at_word(w)) error("expected '" + std::string(w) + "'");
    next();
  }

  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) error(std::string("expected ") + what);
    return next().text;
  }

  std::string expect_label() {
    const Token& t = peek();
    std::string l = expect_ident("block label");
    label_refs_.push_back({l, t.line, t.column});
    return l;
  }

  Operand parse_operand() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Operand::lit(t.value);
    }
    if (t.kind == Tok::Local) {
      next();
      if (params_.count(t.text)) return Operand::param(t.text);
      return Operand::value(t.text);
    }
    error("expected operand");
  }

  void define(const std::string& name, const Token& at) {
    if (params_.count(name) || !defined_.insert(name).second)
      throw ParseError("duplicate definition of %" + name, at.line, at.column);
  }

  Function parse_function() {
    Function f;
    expect_word("func");
    if (peek().kind != Tok::Global) error("expected function name");
    f.name = next().text;
    params_.clear();
    defined_.clear();
    label_refs_.clear();
    expect_punct('(');
    if (!at_punct(')')) {
      for (;;) {
        const Token& t = peek();
        if (t.kind != Tok::Local) error("expected parameter");
        next();
        if (!params_.insert(t.text).second) throw ParseError("duplicate parameter %" + t.text, t.line, t.column);
        f.params.push_back(t.text);
        if (!at_punct(',')) break;
        next();
      }
    }
    expect_punct(')');
    expect_punct('{');
    std::unordered_set<std::string> labels;
    do {
      const Token& t = peek();
      Block b = parse_block();
      if (!labels.insert(b.label).second) throw ParseError("duplicate block label " + b.label, t.line, t.column);
      f.blocks.push_back(std::move(b));
    } while (!at_punct('}'));
    expect_punct('}');
    for (const auto& ref : label_refs_)
      if (!labels.count(ref.label)) throw ParseError("unknown label " + ref.label, ref.line, ref.column);
    return f;
  }

  Block parse_block() {
    Block b;
    b.label = expect_ident("block label");
    expect_punct(':');
    for (;;) {
      if (at_word("jmp") || at_word("br") || at_word("ret")) {
        b.terminator = parse_terminator();
        return b;
      }
      const Token& start = peek();
      Instruction inst = parse_instruction();
      if (inst.op == Opcode::Phi) {
        if (!b.body.empty()) throw ParseError("phi after non-phi instruction", start.line, start.column);
        b.phis.push_back(std::move(inst));
      } else {
        b.body.push_back(std::move(inst));
      }
    }
  }

  Instruction parse_terminator() {
    Instruction t;
    const std::string word = next().text;
    if (word == "jmp") {
      t.op = Opcode::Jmp;
      t.labels.push_back(expect_label());
    } else if (word == "br") {
      t.op = Opcode::Br;
      t.operands.push_back(parse_operand());
      expect_punct(',');
      t.labels.push_back(expect_label());
      expect_punct(',');
      t.labels.push_back(expect_label());
    } else {
      t.op = Opcode::Ret;
      t.operands.push_back(parse_operand());
    }
    return t;
  }

  Instruction parse_instruction() {
    Instruction inst;
    if (at_word("store")) {
      next();
      inst.op = Opcode::Store;
      inst.operands.push_back(parse_operand());
      expect_punct(',');
      inst.operands.push_back(parse_operand());
      return inst;
    }
    if (at_word("print")) {
      next();
      inst.op = Opcode::Print;
      inst.operands.push_back(parse_operand());
      return inst;
    }
    if (peek().kind != Tok::Local) error("expected instruction or terminator");
    const Token& res = next();
    define(res.text, res);
    inst.result = res.text;
    expect_punct('=');
    const std::string word = expect_ident("opcode");
    if (auto op = binop_from_name(word)) {
      inst.op = *op;
      inst.operands.push_back(parse_operand());
      expect_punct(',');
      inst.operands.push_back(parse_operand());
    } else if (word == "cmp") {
      inst.op = Opcode::Cmp;
      std::string cc = expect_ident("comparison code");
      auto code = cmp_from_name(cc);
      if (!code) {
        --pos_;
        error("unknown comparison code");
      }
      inst.cc = *code;
      inst.operands.push_back(parse_operand());
      expect_punct(',');
      inst.operands.push_back(parse_operand());
    } else if (word == "const") {
      inst.op = Opcode::Const;
      if (peek().kind != Tok::Int) error("expected integer");
      inst.operands.push_back(Operand::lit(next().value));
    } else if (word == "opaque") {
      inst.op = Opcode::Opaque;
    } else if (word == "alloca") {
      inst.op = Opcode::Alloca;
    } else if (word == "load") {
      inst.op = Opcode::Load;
      inst.operands.push_back(parse_operand());
    } else if (word == "phi") {
      inst.op = Opcode::Phi;
      expect_punct('[');
      for (;;) {
        inst.labels.push_back(expect_label());
        expect_punct(':');
        inst.operands.push_back(parse_operand());
        if (!at_punct(',')) break;
        next();
      }
      expect_punct(']');
    } else {
      --pos_;
      error("unknown opcode");
    }
    return inst;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::unordered_set<std::string> params_;
  std::unordered_set<std::string> defined_;
  std::vector<LabelRef> label_refs_;
};

}  // namespace

Module parse_module(std::string_view text) { return Parser(Lexer(text).run()).parse(); }

}  // namespace vnlcm
