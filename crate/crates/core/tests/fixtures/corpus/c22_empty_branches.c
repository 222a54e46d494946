int nondet();
int main() {
  int x = nondet();
  if (x > 0) {
  } else {
  }
  x = 3;
  return x;
}
