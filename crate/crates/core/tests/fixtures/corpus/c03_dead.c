int nondet();
int main() {
  int x = nondet();
  int d = 0;
  if (x * x < 0) {
    d = 1;
  } else {
    d = 2;
  }
  return 0;
}
