#pragma once

#include "stlcbot/stl/formula.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace stlcbot::stl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Grammar (whitespace-insensitive):
///   or    := and ('|' and)*
///   and   := until ('&' until)*
///   until := unary ('U' '[' a ',' b ']' unary)?
///   unary := '!' unary | 'G' iv unary | 'F' iv unary | 'agent' '(' i ')' ':' unary
///          | '(' or ')' | 'true' | atom
///   atom  := dist(r,x,y) > c | distbox(r,cx,cy,hx,hy) > c | pairdist(i,j) > c
///          | half(r,nx,ny) > c | goal(r) < c | goal(r,gx,gy) < c
Formula parse_formula(std::string_view text);

}  // namespace stlcbot::stl
