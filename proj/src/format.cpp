#include "sle/format.hpp"

#include <charconv>
#include <stdexcept>

namespace sle {

std::string format_real(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw std::runtime_error("format_real: conversion failed");
    return std::string(buf, res.ptr);
}

}  // namespace sle
