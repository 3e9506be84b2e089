#pragma once

// Text descriptions of models and alternatives, e.g. "poisson:lambda=5",
// "pp:q=0.25,t1=1,t2=5" or "exppoly:theta=0.5,0,-0.2". A token without '='
// continues the list of the previous key. Numbers may be written as fractions
// ("2/3").

#include <string>

#include "stein/models.hpp"
#include "stein/sampling.hpp"

namespace stein {

// poisson:lambda= | negbin:r=,q= | binom:m=,q= | uniform:m= | exppoly:theta=...
// | gibbs:energies=...,particles=...,mu=,T=,kappa=
// Throws ConfigError on syntax errors, DomainError on invalid parameters.
DiscreteModel parse_model(const std::string& text);

// po:lambda= | unif:m= | bin:m=,q= | pp:q=,t1=,t2= | podelta:lambda=,w= |
// w:q=,b= | zmpo:lambda=,q= | ztpo:lambda= | absnorm:mu= | negbin:r=,q= |
// exppoly:theta=...
AltDistSpec parse_alternative(const std::string& text);

// Inverse of parse_alternative.
std::string to_spec_string(const AltDistSpec& spec);

}  // namespace stein
