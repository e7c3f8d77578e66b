#pragma once

#include <stdexcept>
#include <string>

namespace tlns {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad size, bad level, ...).
class InvalidArgument : public Error
{
public:
    using Error::Error;
};

/// Two fields or spaces that must live on nested meshes do not.
class NotNested : public Error
{
public:
    using Error::Error;
};

/// Raised when the mesh hierarchy is too shallow for the requested coupling.
class CouplingError : public Error
{
public:
    using Error::Error;
};

enum class SolverFailure
{
    VelocityBlockNotDefinite,
    PressureBlockSingular,
    ResidualTooLarge,
    NewtonDiverged,
};

class SolverError : public Error
{
public:
    SolverError(SolverFailure kind, const std::string& what)
        : Error(what), kind_(kind)
    {
    }

    SolverFailure kind() const noexcept { return kind_; }

private:
    SolverFailure kind_;
};

} // namespace tlns
