int nondet();
int main() {
  int x = nondet();
  assert(x != -2);
  if (x < 0) {
    x = -x;
  }
  return x;
}
