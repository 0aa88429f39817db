# Recreation of Stack Overflow question 51425688: FrozenLake Q-network with a
# constant exploration rate that is never decayed.
import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense

env = gym.make("FrozenLake-v0")
n_states = 16
n_actions = 4
y = 0.99
e = 0.1
num_episodes = 2000

q_net = Sequential()
q_net.add(Dense(n_actions, input_dim=n_states, activation="linear", use_bias=False))
q_net.compile(loss="mse", optimizer="sgd")

for i in range(num_episodes):
    s = env.reset()
    rAll = 0
    j = 0
    while j < 99:
        j += 1
        one_hot = np.identity(n_states)[s:s + 1]
        allQ = q_net.predict(one_hot)
        if np.random.rand(1) < e:
            a = env.action_space.sample()
        else:
            a = np.argmax(allQ, 1)[0]
        s1, r, d, _ = env.step(a)
        Q1 = q_net.predict(np.identity(n_states)[s1:s1 + 1])
        targetQ = allQ
        targetQ[0, a] = r + y * np.max(Q1)
        q_net.fit(one_hot, targetQ, verbose=0)
        rAll += r
        s = s1
        if d == True:
            break

env.close()
