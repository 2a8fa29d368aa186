#include "magicsim/qasm.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "expr.h"
#include "lexer.h"
#include "magicsim/errors.h"

namespace magicsim {

namespace {

using detail::Token;
using detail::TokenType;

struct Register {
  int offset = 0;
  int size = 0;
};

// Either a whole register or one element of it.
struct Argument {
  std::string reg;
  int index = -1;  // -1: whole register
  int line = 0;
  int column = 0;
};

class QasmParser {
 public:
  explicit QasmParser(std::string_view text) : tokens_(detail::tokenize(text)) {}

  QasmProgram parse() {
    if (is_ident("OPENQASM")) {
      header();
    }
    while (peek().type != TokenType::end) {
      statement();
    }
    program_.qubit_count = next_qubit_;
    return std::move(program_);
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }
  bool is_ident(const char* s) const {
    return peek().type == TokenType::identifier && peek().text == s;
  }
  bool is_symbol(const char* s) const {
    return peek().type == TokenType::symbol && peek().text == s;
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, peek()); }

  void expect_symbol(const char* s) {
    if (!is_symbol(s)) {
      fail(std::string("expected '") + s + "'" +
           (peek().type == TokenType::end ? " before end of input" : ", found '" + peek().text + "'"));
    }
    ++pos_;
  }

  std::string expect_identifier(const char* what) {
    if (peek().type != TokenType::identifier) {
      fail(std::string("expected ") + what);
    }
    return take().text;
  }

  int expect_integer(const char* what) {
    if (peek().type != TokenType::integer) {
      fail(std::string("expected ") + what);
    }
    const Token& tok = take();
    try {
      return std::stoi(tok.text);
    } catch (const std::exception&) {
      fail("integer out of range", tok);
    }
  }

  void header() {
    ++pos_;
    const Token& version = peek();
    if (version.type != TokenType::real && version.type != TokenType::integer) {
      fail("expected version number after OPENQASM");
    }
    ++pos_;
    if (version.text.rfind("2", 0) != 0) {
      fail("only OpenQASM 2.0 is supported (found " + version.text + ")", version);
    }
    expect_symbol(";");
  }

  void statement() {
    const Token& head = peek();
    if (head.type != TokenType::identifier) {
      fail("expected a statement, found '" + head.text + "'");
    }
    const std::string& word = head.text;
    if (word == "include") {
      ++pos_;
      if (peek().type != TokenType::string) {
        fail("expected file name after include");
      }
      ++pos_;
      expect_symbol(";");
    } else if (word == "qreg" || word == "creg") {
      declaration(word == "qreg");
    } else if (word == "measure") {
      measure();
    } else if (word == "barrier") {
      barrier();
    } else if (word == "if") {
      fail("classical control ('if') is not supported", head);
    } else if (word == "gate" || word == "opaque") {
      fail("custom gate definitions are not supported; use a decomposition table", head);
    } else if (word == "reset") {
      fail("'reset' is not supported", head);
    } else if (word == "OPENQASM") {
      fail("OPENQASM header must be the first statement", head);
    } else {
      gate_call();
    }
  }

  void declaration(bool quantum) {
    ++pos_;
    const Token& name_tok = peek();
    const std::string name = expect_identifier("register name");
    expect_symbol("[");
    const int size = expect_integer("register size");
    expect_symbol("]");
    expect_symbol(";");
    if (size <= 0) {
      fail("register '" + name + "' must have positive size", name_tok);
    }
    if (qregs_.count(name) || cregs_.count(name)) {
      fail("register '" + name + "' declared twice", name_tok);
    }
    if (quantum) {
      qregs_[name] = Register{next_qubit_, size};
      next_qubit_ += size;
    } else {
      cregs_[name] = Register{0, size};
    }
  }

  Argument argument() {
    Argument arg;
    arg.line = peek().line;
    arg.column = peek().column;
    arg.reg = expect_identifier("register name");
    if (is_symbol("[")) {
      ++pos_;
      arg.index = expect_integer("index");
      expect_symbol("]");
    }
    return arg;
  }

  std::vector<Argument> argument_list() {
    std::vector<Argument> args{argument()};
    while (is_symbol(",")) {
      ++pos_;
      args.push_back(argument());
    }
    return args;
  }

  const Register& lookup(const std::map<std::string, Register>& regs, const Argument& arg,
                         const char* what) const {
    const auto it = regs.find(arg.reg);
    if (it == regs.end()) {
      throw ParseError(std::string("undeclared ") + what + " '" + arg.reg + "'", arg.line, arg.column);
    }
    if (arg.index >= it->second.size) {
      throw ParseError("index " + std::to_string(arg.index) + " out of range for " + what + " '" +
                           arg.reg + "' of size " + std::to_string(it->second.size),
                       arg.line, arg.column);
    }
    return it->second;
  }

  // Expands register arguments into one operand list per broadcast step.
  std::vector<std::vector<int>> broadcast(const std::vector<Argument>& args) const {
    int width = 1;
    bool any_register = false;
    for (const Argument& arg : args) {
      const Register& reg = lookup(qregs_, arg, "qubit register");
      if (arg.index < 0) {
        if (any_register && reg.size != width) {
          throw ParseError("register size mismatch in broadcast", arg.line, arg.column);
        }
        width = reg.size;
        any_register = true;
      }
    }
    std::vector<std::vector<int>> out(static_cast<std::size_t>(width));
    for (int k = 0; k < width; ++k) {
      for (const Argument& arg : args) {
        const Register& reg = qregs_.at(arg.reg);
        out[static_cast<std::size_t>(k)].push_back(reg.offset + (arg.index < 0 ? k : arg.index));
      }
    }
    return out;
  }

  void gate_call() {
    const Token& name_tok = take();
    std::string name = name_tok.text;
    if (name == "CX") {
      name = "cx";
    } else if (name == "U") {
      name = "u3";
    }
    std::vector<double> params;
    if (is_symbol("(")) {
      ++pos_;
      if (!is_symbol(")")) {
        params.push_back(detail::parse_expression(tokens_, pos_, {}));
        while (is_symbol(",")) {
          ++pos_;
          params.push_back(detail::parse_expression(tokens_, pos_, {}));
        }
      }
      expect_symbol(")");
    }
    const auto args = argument_list();
    expect_symbol(";");
    for (auto& qubits : broadcast(args)) {
      program_.calls.push_back(GateCall{name, params, std::move(qubits), name_tok.line, name_tok.column});
    }
  }

  void measure() {
    const Token& head = take();
    const Argument q = argument();
    std::optional<Argument> c;
    if (is_symbol("->")) {
      ++pos_;
      c = argument();
    }
    expect_symbol(";");
    const Register& qreg = lookup(qregs_, q, "qubit register");
    if (c) {
      const Register& creg = lookup(cregs_, *c, "classical register");
      const int qwidth = q.index < 0 ? qreg.size : 1;
      const int cwidth = c->index < 0 ? creg.size : 1;
      if (qwidth != cwidth) {
        throw ParseError("measure operand sizes differ", c->line, c->column);
      }
    }
    for (auto& qubits : broadcast({q})) {
      program_.calls.push_back(GateCall{"measure", {}, std::move(qubits), head.line, head.column});
    }
  }

  void barrier() {
    const Token& head = take();
    const auto args = argument_list();
    expect_symbol(";");
    std::vector<int> qubits;
    for (const Argument& arg : args) {
      const Register& reg = lookup(qregs_, arg, "qubit register");
      if (arg.index < 0) {
        for (int k = 0; k < reg.size; ++k) {
          qubits.push_back(reg.offset + k);
        }
      } else {
        qubits.push_back(reg.offset + arg.index);
      }
    }
    std::sort(qubits.begin(), qubits.end());
    qubits.erase(std::unique(qubits.begin(), qubits.end()), qubits.end());
    program_.calls.push_back(GateCall{"barrier", {}, std::move(qubits), head.line, head.column});
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::map<std::string, Register> qregs_;
  std::map<std::string, Register> cregs_;
  int next_qubit_ = 0;
  QasmProgram program_;
};

template <class Fn>
void with_location(const GateCall& call, Fn&& fn) {
  try {
    fn();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(e.what(), call.line, call.column);
  }
}

}  // namespace

QasmProgram parse_qasm_program(std::string_view text) { return QasmParser(text).parse(); }

CircuitDag parse_qasm_raw(std::string_view text) {
  const QasmProgram program = parse_qasm_program(text);
  CircuitDag dag(program.qubit_count);
  for (const GateCall& call : program.calls) {
    with_location(call, [&] {
      if (auto kind = core_gate_kind(call.name, call.params)) {
        const auto arity = core_gate_arity(call.name);
        if (arity && static_cast<std::size_t>(*arity) != call.qubits.size()) {
          throw InputError("gate '" + call.name + "' expects " + std::to_string(*arity) +
                           " qubit(s), got " + std::to_string(call.qubits.size()));
        }
        const int duration = std::holds_alternative<gate::Barrier>(*kind) ? 0 : 1;
        dag.append(std::move(*kind), call.qubits, duration);
      } else {
        dag.append(gate::Composite{call.name, call.params}, call.qubits, 1);
      }
    });
  }
  return dag;
}

CircuitDag parse_qasm(std::string_view text, const DecompositionTable& table) {
  const QasmProgram program = parse_qasm_program(text);
  CircuitDag dag(program.qubit_count);
  for (const GateCall& call : program.calls) {
    with_location(call, [&] { append_lowered(dag, call.name, call.params, call.qubits, table); });
  }
  return dag;
}

CircuitDag load_qasm_file(const std::string& path, const DecompositionTable& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open circuit file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_qasm(buf.str(), table);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), e.column(), path);
  }
}

}  // namespace magicsim
